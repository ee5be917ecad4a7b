//! Flat `key = value` configuration files.
//!
//! Keys are long flag names, with `_` or `-` as separators. A repeated key
//! supplies a repeatable flag several times. Values from the file are spliced
//! into the argument list ahead of the command-line flags, so flags win.

use std::collections::HashSet;
use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::CommandFactory;

use crate::args::Cli;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

pub fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`", i + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            bail!("config line {}: empty key", i + 1);
        }
        out.push(Entry {
            key,
            value: v.trim().to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<Entry>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse(&text).with_context(|| format!("in {}", path.display()))
}

/// Finds `--config PATH` or `--config=PATH` in raw arguments.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Rewrites `args` so that entries from the config file named by `--config`
/// precede the user's own flags for the chosen subcommand.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let entries = load(Path::new(&path))?;
    let Some(sub_pos) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 1)
    else {
        return Ok(args);
    };
    let sub_name = args[sub_pos].to_string_lossy().into_owned();
    let cmd = Cli::command();
    let all_keys: HashSet<String> = cmd
        .get_subcommands()
        .flat_map(|s| s.get_arguments())
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        return Ok(args);
    };

    let user_flags: HashSet<String> = args[sub_pos + 1..]
        .iter()
        .filter_map(|a| {
            let s = a.to_string_lossy();
            s.strip_prefix("--")
                .map(|f| f.split('=').next().unwrap_or_default().to_string())
        })
        .collect();

    let mut injected: Vec<OsString> = Vec::new();
    for e in &entries {
        if !all_keys.contains(&e.key) {
            bail!("config line {}: unknown key `{}`", e.line, e.key);
        }
        if e.key == "config" {
            bail!("config line {}: nested config files are not supported", e.line);
        }
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(e.key.as_str())) else {
            continue;
        };
        let repeatable = matches!(arg.get_action(), clap::ArgAction::Append);
        if repeatable && user_flags.contains(&e.key) {
            continue;
        }
        match arg.get_action() {
            clap::ArgAction::SetTrue => match e.value.as_str() {
                "true" | "yes" | "1" | "on" => injected.push(format!("--{}", e.key).into()),
                "false" | "no" | "0" | "off" => {}
                v => bail!("config line {}: `{}` expects true/false, got `{v}`", e.line, e.key),
            },
            _ => injected.push(format!("--{}={}", e.key, e.value).into()),
        }
    }

    let mut out = args[..=sub_pos].to_vec();
    out.extend(injected);
    out.extend(args[sub_pos + 1..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_comments_and_separators() {
        let e = parse("# poi\npoi_name = Hyde Park\n\nquery=Hyde Park\nquery = hydepark\n").unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e[0].key, "poi-name");
        assert_eq!(e[0].value, "Hyde Park");
        assert_eq!(e[2].line, 5);
        assert!(parse("novalue\n").is_err());
    }

    #[test]
    fn file_values_precede_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.conf");
        std::fs::write(&p, "eta = 0.1\nalpha = 0.5\ncase_insensitive = true\nseed = 3\n").unwrap();
        let args = os(&["spatiotex", "cluster", "--config", p.to_str().unwrap(), "--eta", "0.2", "--alpha", "1"]);
        let out = expand_args(args).unwrap();
        let s: Vec<String> = out.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(s[..4], ["spatiotex", "cluster", "--eta=0.1", "--case-insensitive"]);
        assert!(!s.contains(&"--alpha=0.5".to_string()));
        assert!(!s.iter().any(|a| a.starts_with("--seed")));
        assert_eq!(s.last().unwrap(), "1");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.conf");
        std::fs::write(&p, "colour = red\n").unwrap();
        let args = os(&["spatiotex", "cluster", "--config", p.to_str().unwrap()]);
        assert!(expand_args(args).is_err());
    }
}
