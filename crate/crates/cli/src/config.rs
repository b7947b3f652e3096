//! Flat `key = value` config files, spliced into argv ahead of the user's
//! flags so that flags win.

use std::fs;

/// Keys that map to switches rather than valued flags.
const SWITCHES: [&str; 2] = ["selftest", "off-diagonal"];

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value, got {line:?}", i + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut path = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = it.next().cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    path
}

fn as_flags(entries: &[(String, String)]) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (k, v) in entries {
        if k == "command" || k == "config" {
            continue;
        }
        if SWITCHES.contains(&k.as_str()) {
            match v.as_str() {
                "true" | "1" | "yes" => out.push(format!("--{k}")),
                "false" | "0" | "no" => {}
                _ => return Err(format!("config key {k} expects true or false, got {v:?}")),
            }
        } else {
            out.push(format!("--{k}={v}"));
        }
    }
    Ok(out)
}

/// Returns argv with the config's flags inserted right after the subcommand.
/// A `command` key supplies the subcommand when argv names none.
pub fn expand(args: Vec<String>, subcommands: &[&str]) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let entries = parse(&text)?;
    let flags = as_flags(&entries)?;
    let mut args = args;
    match args.iter().position(|a| subcommands.contains(&a.as_str())) {
        Some(pos) => {
            args.splice(pos + 1..pos + 1, flags);
        }
        None => {
            let cmd = entries
                .iter()
                .rev()
                .find(|(k, _)| k == "command")
                .map(|(_, v)| v.clone())
                .ok_or_else(|| "no subcommand given on the command line or in the config".to_string())?;
            args.push(cmd);
            args.extend(flags);
        }
    }
    Ok(args)
}
