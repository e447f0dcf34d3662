//! JSON configuration files.
//!
//! A config file is a flat object whose keys are long flag names. Its
//! entries are appended to the command line as flags, and since every
//! subcommand lets a later occurrence of a flag replace an earlier one, the
//! file wins over flags given by hand, which win over defaults.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

use crate::CliError;

/// Removes `--config PATH` / `--config=PATH` from `args` and returns the path.
fn take_config_path(args: &mut Vec<OsString>) -> Result<Option<String>, CliError> {
    let mut found = None;
    let mut i = 0;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--" {
            break;
        }
        if a == "--config" {
            let path = args
                .get(i + 1)
                .ok_or_else(|| CliError::Usage("--config needs a file path".into()))?
                .to_string_lossy()
                .into_owned();
            args.drain(i..i + 2);
            found = Some(path);
        } else if let Some(p) = a.strip_prefix("--config=") {
            found = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(found)
}

fn scalar(key: &str, v: &Value) -> Result<String, CliError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(CliError::Usage(format!("config key '{key}': expected a string or number"))),
    }
}

/// Flags equivalent to a config object.
pub fn flags_from_json(text: &str) -> Result<Vec<OsString>, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config file: {e}")))?;
    let Value::Object(map) = v else {
        return Err(CliError::Usage("config file must hold a JSON object".into()));
    };
    let mut out = Vec::new();
    for (key, value) in &map {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => out.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts = items.iter().map(|x| scalar(key, x)).collect::<Result<Vec<_>, _>>()?;
                out.push(format!("{flag}={}", parts.join(",")).into());
            }
            other => out.push(format!("{flag}={}", scalar(key, other)?).into()),
        }
    }
    Ok(out)
}

/// The command line with any config file's flags appended.
pub fn expand_args(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    if let Some(path) = take_config_path(&mut args)? {
        let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("reading config {path}: {e}")))?;
        args.extend(flags_from_json(&text)?);
    }
    Ok(args)
}
