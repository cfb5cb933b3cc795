//! `--config <file>` support.
//!
//! The file holds one `key = value` (or `key value`) pair per line, `#`
//! starts a comment, and keys are flag names without the leading dashes.
//! A value of `true` sets a boolean flag and `false` omits it. The pairs are
//! spliced in directly after the subcommand name, ahead of the user's own
//! flags, and since every flag keeps its last value the command line wins.

use std::ffi::OsString;
use std::fs;

pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => match line.split_once(char::is_whitespace) {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (line, "true"),
            },
        };
        let key = key.trim_start_matches("--");
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(format!("line {}: malformed entry {raw:?}", no + 1));
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

/// Removes `--config` from `args` and splices the file's flags in after the
/// subcommand.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    if let Some(prog) = it.next() {
        rest.push(prog);
    }
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = Some(it.next().ok_or("--config needs a file path")?);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config file {}: {e}", path.to_string_lossy()))?;
    let mut injected = Vec::new();
    for (k, v) in parse_config_file(&text)? {
        match v.as_str() {
            "true" => injected.push(OsString::from(format!("--{k}"))),
            "false" => {}
            _ => {
                injected.push(OsString::from(format!("--{k}")));
                injected.push(OsString::from(v));
            }
        }
    }
    let sub = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 2);
    match sub {
        Some(at) => {
            rest.splice(at..at, injected);
            Ok(rest)
        }
        None => Ok(rest),
    }
}
