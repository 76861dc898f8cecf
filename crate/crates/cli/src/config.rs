//! `key=value` config files, merged in front of the command-line flags.

use std::ffi::OsString;
use std::fs;

use clap::CommandFactory;

use crate::args::Cli;
use crate::error::CliError;

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

/// Inserts the config entries right after the subcommand name, so that
/// later occurrences on the command line override them.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text =
        fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.to_string_lossy())))?;
    let entries = parse(&text)?;
    let root = Cli::command();
    let Some((pos, sub)) = args.iter().enumerate().skip(1).find_map(|(i, a)| {
        let name = a.to_str()?;
        root.find_subcommand(name).map(|c| (i, c.clone()))
    }) else {
        return Ok(args);
    };
    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| CliError::Usage(format!("config key {key:?} is not a flag of {}", sub.get_name())))?;
        if !arg.get_action().takes_values() {
            match value.as_str() {
                "true" => injected.push(format!("--{key}").into()),
                "false" => {}
                _ => return Err(CliError::Usage(format!("config key {key:?} takes true or false"))),
            }
            continue;
        }
        let multi = arg.get_num_args().is_some_and(|n| n.max_values() > 1);
        if multi {
            injected.push(format!("--{key}").into());
            injected.extend(value.split_whitespace().map(OsString::from));
        } else {
            injected.push(format!("--{key}={value}").into());
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}
