//! Flat `name = value` parameter files with `#` comments.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{ModelError, ModelParams};

#[derive(Debug, Error)]
pub enum ParamFileError {
    #[error("cannot read parameter file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `name = value`, got `{content}`")]
    Syntax { line: usize, content: String },
    #[error("line {line}: unknown parameter `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` has non-numeric value `{value}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

const KEYS: [&str; 12] = [
    "B", "mu", "d", "gamma0", "gamma1", "gamma2", "beta0", "beta1", "beta2", "q", "eta", "u",
];

fn slot<'a>(p: &'a mut ModelParams, key: &str) -> Option<&'a mut f64> {
    Some(match key {
        "B" => &mut p.b,
        "mu" => &mut p.mu,
        "d" => &mut p.d,
        "gamma0" => &mut p.gamma0,
        "gamma1" => &mut p.gamma1,
        "gamma2" => &mut p.gamma2,
        "beta0" => &mut p.beta0,
        "beta1" => &mut p.beta1,
        "beta2" => &mut p.beta2,
        "q" => &mut p.q,
        "eta" => &mut p.eta,
        "u" => &mut p.u,
        _ => return None,
    })
}

/// Parses `text`, overriding the fields of `base` that appear in it.
pub fn parse_param_file(text: &str, base: ModelParams) -> Result<ModelParams, ParamFileError> {
    let mut p = base;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ParamFileError::Syntax {
                line,
                content: content.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let target = slot(&mut p, key).ok_or_else(|| ParamFileError::UnknownKey {
            line,
            key: key.to_string(),
        })?;
        *target = value.parse().map_err(|_| ParamFileError::BadValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        })?;
    }
    p.validate()?;
    Ok(p)
}

pub fn load_param_file(path: &Path, base: ModelParams) -> Result<ModelParams, ParamFileError> {
    let text = std::fs::read_to_string(path)?;
    parse_param_file(&text, base)
}

/// Renders every field, in a form [`parse_param_file`] reads back exactly.
pub fn write_param_file(p: &ModelParams) -> String {
    let mut copy = *p;
    let mut out = String::from("# model parameters (millions, years)\n");
    for key in KEYS {
        let value = *slot(&mut copy, key).expect("known key");
        writeln!(out, "{key} = {value:?}").expect("write to String");
    }
    out
}
