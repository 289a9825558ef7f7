//! `key = value` config files.
//!
//! Each entry becomes `--key=value` placed directly after the subcommand,
//! so flags given on the command line (which come later and override) win.
//! Entries for `seed` and `threads` are dropped when the matching
//! environment variable is set. `true` and `false` switch flags on or off.

use std::ffi::OsString;
use std::path::Path;

use crate::CliError;

pub fn parse(text: &str, source: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected `key = value`, got {raw:?}", source.display(), i + 1))
        })?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("{}:{}: invalid key {:?}", source.display(), i + 1, k.trim())));
        }
        out.push((key, v.trim().trim_matches('"').to_string()));
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
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// The argument list with config-file entries spliced in after the
/// subcommand name.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    let mut injected = Vec::new();
    for (key, value) in parse(&text, path)? {
        let env = match key.as_str() {
            "seed" => Some("LTMAX_SEED"),
            "threads" => Some("LTMAX_THREADS"),
            _ => None,
        };
        if env.is_some_and(|e| std::env::var_os(e).is_some()) {
            continue;
        }
        match value.as_str() {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => injected.push(OsString::from(format!("--{key}={value}"))),
        }
    }
    let at = argv.len().min(2);
    let mut out = argv[..at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}
