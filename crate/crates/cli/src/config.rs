//! `--config FILE` support: a flat `key = value` file whose keys are long
//! flag names. Entries become defaults by being appended to the argument list
//! for flags the command line does not already set.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{ArgAction, CommandFactory};

use crate::args::Cli;
use crate::CliError;

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped,
/// and values may be wrapped in double quotes.
pub fn parse_config(text: &str, origin: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{}:{}: expected `key = value`, found `{line}`", origin.display(), i + 1)));
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        let mut value = v.trim();
        if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
            value = &value[1..value.len() - 1];
        } else if let Some(pos) = value.find(" #") {
            value = value[..pos].trim_end();
        }
        if key.is_empty() {
            return Err(CliError::Usage(format!("{}:{}: empty key", origin.display(), i + 1)));
        }
        out.push((key, value.to_string()));
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
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

fn flag_present(argv: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let with_eq = format!("--{long}=");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&with_eq)
    })
}

/// Returns `argv` with defaults from the config file (if `--config` is given)
/// appended for the selected subcommand. Keys that name no flag of any
/// subcommand are an error; keys belonging only to other subcommands are
/// ignored so one file can serve several commands.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path = Path::new(&path).to_path_buf();
    let text = fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let entries = parse_config(&text, &path)?;

    let root = Cli::command();
    let sub = argv
        .iter()
        .skip(1)
        .find_map(|a| root.get_subcommands().find(|c| c.get_name() == a.to_string_lossy()))
        .cloned();
    let mut merged = argv.clone();
    for (key, value) in entries {
        if matches!(key.as_str(), "config" | "help" | "version") {
            return Err(CliError::Usage(format!("{}: key `{key}` is not allowed in a config file", path.display())));
        }
        let known = root
            .get_arguments()
            .chain(root.get_subcommands().flat_map(|c| c.get_arguments()))
            .any(|a| a.get_long() == Some(key.as_str()));
        if !known {
            return Err(CliError::Usage(format!("{}: unknown key `{key}`", path.display())));
        }
        let arg = root
            .get_arguments()
            .chain(sub.iter().flat_map(|c| c.get_arguments()))
            .find(|a| a.get_long() == Some(key.as_str()));
        let Some(arg) = arg else { continue };
        if flag_present(&argv, &key) {
            continue;
        }
        let multi = arg.get_num_args().is_some_and(|n| n.min_values() > 1);
        match arg.get_action() {
            _ if multi => {
                merged.push(format!("--{key}").into());
                merged.extend(value.split_whitespace().map(OsString::from));
            }
            ArgAction::SetTrue | ArgAction::SetFalse | ArgAction::Count => {
                if matches!(value.as_str(), "true" | "1" | "yes") {
                    merged.push(format!("--{key}").into());
                }
            }
            ArgAction::Append => {
                for tok in value.split_whitespace() {
                    merged.push(format!("--{key}={tok}").into());
                }
            }
            _ => merged.push(format!("--{key}={value}").into()),
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_flat_pairs() {
        let text = "# defaults\nalpha = 0.6\n\ndrift = \"x - x^3\"\ngrid=100 # coarse\n";
        let e = parse_config(text, Path::new("c")).unwrap();
        assert_eq!(
            e,
            vec![("alpha".into(), "0.6".into()), ("drift".into(), "x - x^3".into()), ("grid".into(), "100".into())]
        );
        assert!(parse_config("alpha 0.6\n", Path::new("c")).unwrap_err().to_string().contains("c:1"));
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "alpha = 0.6\ndomain = -2 2\ngrid = 50\nfixed = epsilon=1 d=0\nseed = 3\n").unwrap();
        let argv = os(&["levy-exit", "solve-met", "--config", cfg.to_str().unwrap(), "--grid", "80"]);
        let merged = merge_config(argv).unwrap();
        let tail: Vec<String> = merged[4..].iter().map(|s| s.to_string_lossy().into_owned()).collect();
        assert_eq!(tail, vec!["--grid", "80", "--alpha=0.6", "--domain", "-2", "2"]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "alpah = 0.6\n").unwrap();
        let err = merge_config(os(&["levy-exit", "solve-met", "--config", cfg.to_str().unwrap()])).unwrap_err();
        assert!(err.to_string().contains("alpah"));
    }
}
