//! Flat `key = value` config files, expanded into command-line flags. A key
//! also given as a flag on the command line is dropped from the file, so
//! the command line always wins.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{AppError, Result};

/// One `key = value` line. `value` is `None` for a bare boolean flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: Option<String>,
}

/// Parses config text. Blank lines and `#` comments are ignored, `_` in
/// keys becomes `-`, `true` becomes a bare flag and `false` drops the key.
/// A repeated key yields a repeated flag, for options taking several values.
pub fn parse(text: &str, source: &Path) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_line(source, i + 1, "expected `key = value`"));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return Err(config_line(source, i + 1, format!("invalid key `{key}`")));
        }
        if key == "config" {
            return Err(config_line(source, i + 1, "config files cannot include other config files"));
        }
        let value = match value {
            "true" => None,
            "false" => continue,
            v => Some(v.to_string()),
        };
        out.push(Entry { key, value });
    }
    Ok(out)
}

fn config_line(source: &Path, line: usize, msg: impl std::fmt::Display) -> AppError {
    AppError::config(format!("{}:{line}: {msg}", source.display()))
}

/// Long flag names present in `args`.
fn given_flags(args: &[String]) -> HashSet<String> {
    args.iter()
        .take_while(|a| *a != "--")
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split_once('=').map_or(a, |(k, _)| k).to_string())
        .collect()
}

/// Removes `--config FILE` (or `--config=FILE`) from `args` and splices the
/// file's flags in right after the subcommand. `args[0]` is the program
/// name and `args[1]` the subcommand.
pub fn expand(args: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut file = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--" {
            rest.push(a);
            rest.extend(it.by_ref());
            break;
        }
        if a == "--config" {
            file = Some(it.next().ok_or_else(|| AppError::config("--config needs a file path"))?);
        } else if let Some(path) = a.strip_prefix("--config=") {
            file = Some(path.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(file) = file else {
        return Ok(rest);
    };
    let path = Path::new(&file);
    let text = std::fs::read_to_string(path).map_err(|e| AppError::open(path, e))?;
    let given = given_flags(&rest);
    let mut from_file = Vec::new();
    for e in parse(&text, path)? {
        if given.contains(&e.key) {
            continue;
        }
        from_file.push(format!("--{}", e.key));
        from_file.extend(e.value);
    }
    let at = rest.len().min(2);
    let mut out = Vec::with_capacity(rest.len() + from_file.len());
    out.extend_from_slice(&rest[..at]);
    out.extend(from_file);
    out.extend_from_slice(&rest[at..]);
    Ok(out)
}
