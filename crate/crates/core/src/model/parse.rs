//! Textual weight-profile formats shared by the library and the CLI.
//!
//! Command-line specs: `equi:N`, `powerlaw:N:s`, `file:PATH`.
//!
//! Profile files hold either one weight per line, or a single line
//! `equi N` / `powerlaw N s`. Blank lines and `#` comments are ignored.

use std::fmt;
use std::path::{Path, PathBuf};

use super::WeightProfile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    Equiprobable(usize),
    PowerLaw(usize, f64),
    Weights(Vec<f64>),
    File(PathBuf),
}

impl ProfileSpec {
    pub fn build(&self) -> Result<WeightProfile> {
        match self {
            ProfileSpec::Equiprobable(n) => WeightProfile::equiprobable(*n),
            ProfileSpec::PowerLaw(n, s) => WeightProfile::power_law(*n, *s),
            ProfileSpec::Weights(w) => WeightProfile::new(w.clone()),
            ProfileSpec::File(path) => load_profile_file(path),
        }
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSpec::Equiprobable(n) => write!(f, "equi:{n}"),
            ProfileSpec::PowerLaw(n, s) => write!(f, "powerlaw:{n}:{s}"),
            ProfileSpec::Weights(w) => write!(f, "weights:{}", w.len()),
            ProfileSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn parse_err(origin: &str, message: impl Into<String>) -> Error {
    Error::Parse { origin: origin.to_string(), message: message.into() }
}

fn parse_count(origin: &str, token: &str) -> Result<usize> {
    token
        .trim()
        .parse::<usize>()
        .map_err(|e| parse_err(origin, format!("bad box count {token:?}: {e}")))
}

fn parse_float(origin: &str, token: &str) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|e| parse_err(origin, format!("bad number {token:?}: {e}")))
}

/// Parses a command-line profile spec.
pub fn parse_profile_spec(spec: &str) -> Result<ProfileSpec> {
    let (kind, rest) = spec.split_once(':').ok_or_else(|| {
        parse_err(spec, "expected equi:N, powerlaw:N:s or file:PATH")
    })?;
    match kind {
        "equi" => Ok(ProfileSpec::Equiprobable(parse_count(spec, rest)?)),
        "powerlaw" => {
            let (n, s) = rest
                .split_once(':')
                .ok_or_else(|| parse_err(spec, "expected powerlaw:N:s"))?;
            Ok(ProfileSpec::PowerLaw(parse_count(spec, n)?, parse_float(spec, s)?))
        }
        "file" if !rest.is_empty() => Ok(ProfileSpec::File(PathBuf::from(rest))),
        _ => Err(parse_err(spec, format!("unknown profile kind {kind:?}"))),
    }
}

/// Parses the contents of a profile file.
pub fn parse_profile_text(text: &str, origin: &str) -> Result<ProfileSpec> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let Some(&(first_no, first)) = lines.first() else {
        return Err(parse_err(origin, "no weights"));
    };
    let tokens: Vec<&str> = first.split_whitespace().collect();
    let keyword = match tokens[0] {
        "equi" | "powerlaw" => Some(tokens[0]),
        _ => None,
    };
    if let Some(keyword) = keyword {
        if lines.len() > 1 {
            return Err(parse_err(
                origin,
                format!("line {}: `{keyword}` must be the only entry", lines[1].0),
            ));
        }
        return match (keyword, tokens.as_slice()) {
            ("equi", [_, n]) => Ok(ProfileSpec::Equiprobable(parse_count(origin, n)?)),
            ("powerlaw", [_, n, s]) => Ok(ProfileSpec::PowerLaw(
                parse_count(origin, n)?,
                parse_float(origin, s)?,
            )),
            _ => Err(parse_err(origin, format!("line {first_no}: malformed `{first}`"))),
        };
    }
    let weights = lines
        .iter()
        .map(|&(no, l)| {
            parse_float(origin, l).map_err(|e| match e {
                Error::Parse { origin, message } => {
                    Error::Parse { origin, message: format!("line {no}: {message}") }
                }
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProfileSpec::Weights(weights))
}

pub fn load_profile_file(path: &Path) -> Result<WeightProfile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let spec = parse_profile_text(&text, &path.display().to_string())?;
    if let ProfileSpec::File(_) = spec {
        unreachable!("profile files cannot nest");
    }
    spec.build()
}
