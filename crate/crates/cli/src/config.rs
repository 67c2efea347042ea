//! Flat `key = value` config files merged under command-line flags.
//!
//! Keys are the long flag names of the chosen subcommand (`def-fraction`,
//! `seed`, ...); underscores are accepted in place of hyphens. A flag given
//! on the command line always wins over the file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use anyhow::{Context, Result};
use clap::CommandFactory;

use crate::{Cli, UsageError};

const GLOBAL_WITH_VALUE: [&str; 2] = ["--threads", "--config"];

pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            UsageError(format!("config line {}: expected `key = value`", i + 1))
        })?;
        let key = k.trim().replace('_', "-");
        if out.insert(key.clone(), v.trim().to_owned()).is_some() {
            return Err(UsageError(format!("config line {}: duplicate key `{key}`", i + 1)).into());
        }
    }
    Ok(out)
}

/// The subcommand name and the `--config` path, found without full parsing.
fn scan(args: &[OsString]) -> (Option<String>, Option<String>) {
    let mut sub = None;
    let mut config = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_owned());
        } else if GLOBAL_WITH_VALUE.contains(&a.as_str()) {
            if a == "--config" {
                config = args.get(i + 1).map(|v| v.to_string_lossy().into_owned());
            }
            i += 1;
        } else if !a.starts_with('-') && sub.is_none() {
            sub = Some(a);
        }
        i += 1;
    }
    (sub, config)
}

/// Append config-file values for flags absent from `args`.
pub fn merge(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let (Some(sub), Some(path)) = scan(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config file {path}"))?;
    let values = parse_file(&text)?;
    let cmd = Cli::command();
    let Some(sub_cmd) = cmd.find_subcommand(&sub) else {
        return Ok(args);
    };
    let present: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().split('=').next().unwrap_or("").to_owned())
        .collect();
    let mut merged = args.clone();
    for (key, value) in values {
        let arg = sub_cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| UsageError(format!("unknown config key `{key}` for `{sub}`")))?;
        let flag = format!("--{key}");
        if present.contains(&flag) {
            continue;
        }
        if arg.get_action().takes_values() {
            merged.push(flag.into());
            merged.push(value.into());
        } else {
            match value.as_str() {
                "true" => merged.push(flag.into()),
                "false" => {}
                other => {
                    return Err(UsageError(format!(
                        "config key `{key}` is a switch; expected true or false, got `{other}`"
                    ))
                    .into())
                }
            }
        }
    }
    Ok(merged)
}

/// `key = value` lines for a serializable argument struct, sorted by key.
pub fn render_resolved<T: serde::Serialize>(args: &T) -> String {
    let value = serde_json::to_value(args).expect("arguments serialize");
    let mut out = String::new();
    if let serde_json::Value::Object(map) = value {
        let sorted: BTreeMap<_, _> = map.into_iter().collect();
        for (k, v) in sorted {
            let v = match v {
                serde_json::Value::Null => continue,
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            out.push_str(&format!("{} = {v}\n", k.replace('_', "-")));
        }
    }
    out
}
