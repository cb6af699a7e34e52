//! Key-value configuration files.
//!
//! Each non-blank line is `key = value`, where `key` is a long flag name
//! without the leading dashes; `#` starts a comment. `key = true` turns
//! on a switch and `key = false` leaves it off. File entries are spliced
//! in before the command-line flags, and the parser keeps the last
//! occurrence, so flags given on the command line win.

use std::path::Path;

use crate::error::{Error, Result};

/// Parses a configuration file into `(key, value)` pairs in file order.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected `key = value`", i + 1)))?;
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(Error::Parse(format!("config line {}: bad key {k:?}", i + 1)));
        }
        let v = v.trim();
        let v = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Turns configuration pairs into command-line arguments.
pub fn config_args(pairs: &[(String, String)]) -> Vec<String> {
    let mut out = Vec::new();
    for (k, v) in pairs {
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => {
                out.push(format!("--{k}"));
                out.push(v.clone());
            }
        }
    }
    out
}

/// Removes `--config <file>` from `args` and splices the file's entries in
/// right after the subcommand name.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| Error::Invalid("--config needs a file".into()))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| Error::Invalid(format!("cannot read config file {path}: {e}")))?;
    let extra = config_args(&parse_config(&text)?);
    let at = rest.iter().skip(1).position(|a| !a.starts_with('-')).map_or(rest.len(), |i| i + 2);
    rest.splice(at..at, extra);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_pairs_and_comments() {
        let p = parse_config("# run\ncase = s4\n\norder=2  # second\nlog = true\nquiet = false\nout = \"a b.json\"\n").unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(config_args(&p), s(&["--case", "s4", "--order", "2", "--log", "--out", "a b.json"]));
        assert!(parse_config("nonsense").is_err());
    }

    #[test]
    fn file_entries_precede_flags() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("run.conf");
        std::fs::write(&f, "case = s3\norder = 1\n").unwrap();
        let args = s(&["pq", "count", "--order", "2", "--config", f.to_str().unwrap()]);
        let out = expand_config(args).unwrap();
        assert_eq!(out, s(&["pq", "count", "--case", "s3", "--order", "1", "--order", "2"]));
    }
}
