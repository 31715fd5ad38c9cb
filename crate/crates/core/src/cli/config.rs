//! Merging a JSON config file with command-line flags.
//!
//! Flags win over the file, the file wins over built-in defaults. A flag
//! counts as given when it is not absent, not an empty list and not a
//! `false` switch. Relative paths are resolved against the working
//! directory for flags and against the config file's directory for file
//! values, so the config written next to the outputs holds absolute
//! paths and can be re-run from anywhere.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Keys whose values are file paths (or lists of them).
const PATH_KEYS: [&str; 11] = [
    "out",
    "schema",
    "observed",
    "new",
    "transform",
    "import_summaries",
    "reports",
    "reference",
    "null",
    "alt",
    "alt_new",
];

/// Values of path-like keys that name built-in models, not files.
fn is_builtin(s: &str) -> bool {
    s.starts_with("toy-")
}

fn absolute(path: &str, base: &Path) -> String {
    let p = Path::new(path);
    if p.is_absolute() {
        path.to_string()
    } else {
        base.join(p).to_string_lossy().into_owned()
    }
}

// `NAME=PATH` keeps its name.
fn absolute_entry(entry: &str, base: &Path) -> String {
    if is_builtin(entry) {
        return entry.to_string();
    }
    match entry.split_once('=') {
        Some((name, path)) => format!("{name}={}", absolute(path, base)),
        None => absolute(entry, base),
    }
}

fn absolutize(map: &mut Map<String, Value>, base: &Path) {
    for key in PATH_KEYS {
        match map.get_mut(key) {
            Some(Value::String(s)) => *s = absolute_entry(s, base),
            Some(Value::Array(items)) => {
                for item in items {
                    if let Value::String(s) = item {
                        *s = absolute_entry(s, base);
                    }
                }
            }
            _ => {}
        }
    }
}

fn given(v: &Value) -> bool {
    match v {
        Value::Null | Value::Bool(false) => false,
        Value::Array(a) => !a.is_empty(),
        _ => true,
    }
}

fn as_object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn cwd() -> Result<PathBuf> {
    std::env::current_dir().map_err(|e| Error::io(".", e))
}

/// Combine `flags` with the optional config file for `command`.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>, command: &str) -> Result<T> {
    let mut merged = Map::new();
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut file = match serde_json::from_str::<Value>(&text)? {
            Value::Object(m) => m,
            _ => return Err(Error::Spec(format!("{}: config must be a JSON object", path.display()))),
        };
        if let Some(c) = file.remove("command") {
            if c.as_str() != Some(command) {
                return Err(Error::Spec(format!(
                    "{}: config is for command {c}, not `{command}`",
                    path.display()
                )));
            }
        }
        let base = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => cwd()?,
        };
        let base = if base.is_absolute() { base } else { cwd()?.join(base) };
        absolutize(&mut file, &base);
        merged.extend(file.into_iter().filter(|(_, v)| !v.is_null()));
    }
    let mut flag_map = as_object(serde_json::to_value(flags)?);
    absolutize(&mut flag_map, &cwd()?);
    merged.extend(flag_map.into_iter().filter(|(_, v)| given(v)));
    let keys: Vec<String> = merged.keys().cloned().collect();
    let resolved: T = serde_json::from_value(Value::Object(merged))?;
    let known = as_object(serde_json::to_value(&resolved)?);
    if let Some(unknown) = keys.iter().find(|k| !known.contains_key(*k)) {
        return Err(Error::Spec(format!("unknown config key `{unknown}`")));
    }
    Ok(resolved)
}

/// The resolved config as written to `config.json`.
pub fn to_config_value<T: Serialize>(resolved: &T, command: &str) -> Result<Value> {
    let mut map = Map::new();
    map.insert("command".into(), Value::String(command.into()));
    map.extend(as_object(serde_json::to_value(resolved)?));
    Ok(Value::Object(map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::args::PriorArgs;

    #[test]
    fn flags_override_file_and_paths_resolve() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(
            &cfg,
            r#"{"command": "prior", "seed": 3, "n_calib": 10, "reference": ["a=t.csv"], "bh": true}"#,
        )
        .unwrap();
        let mut flags = PriorArgs::default();
        flags.run.seed = Some(9);
        let m = merge(&flags, Some(&cfg), "prior").unwrap();
        assert_eq!(m.run.seed, Some(9));
        assert_eq!(m.n_calib, Some(10));
        assert!(m.bh);
        assert_eq!(m.table.reference, vec![format!("a={}", dir.path().join("t.csv").display())]);
    }

    #[test]
    fn rejects_unknown_keys_and_wrong_command() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"n_calb": 10}"#).unwrap();
        let err = merge(&PriorArgs::default(), Some(&cfg), "prior").unwrap_err();
        assert!(err.to_string().contains("n_calb"));
        std::fs::write(&cfg, r#"{"command": "holdout"}"#).unwrap();
        assert!(merge(&PriorArgs::default(), Some(&cfg), "prior").is_err());
    }

    #[test]
    fn builtin_models_are_not_paths() {
        assert_eq!(absolute_entry("toy-laplace", Path::new("/x")), "toy-laplace");
        assert_eq!(absolute_entry("/abs/t.csv", Path::new("/x")), "/abs/t.csv");
        assert_eq!(absolute_entry("t.csv", Path::new("/x")), "/x/t.csv");
    }
}
