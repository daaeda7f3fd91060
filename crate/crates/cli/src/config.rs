//! JSON configuration documents, `--set` overrides and typed parsing.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

/// A configuration problem attributed to a key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { key: key.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config key `{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

/// Fails with `key` named when `ok` is false.
pub fn ensure(ok: bool, key: &str, message: impl fmt::Display) -> ConfigResult<()> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(key, message))
    }
}

pub fn positive(value: f64, key: &str) -> ConfigResult<()> {
    ensure(value > 0.0 && value.is_finite(), key, format!("must be positive and finite, got {value}"))
}

/// Reads a JSON document whose root is an object.
pub fn load(path: &Path) -> ConfigResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| ConfigError::new("", format!("{} is not valid JSON: {e}", path.display())))?;
    ensure(doc.is_object(), "", "the document root must be a JSON object")?;
    Ok(doc)
}

/// Applies `key=value`. The key may be a dotted path; missing objects are created.
/// The value is parsed as JSON when possible and taken as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> ConfigResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::new(assignment, "override must have the form key=value"))?;
    let key = key.trim();
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    set_path(doc, key, value)
}

pub fn set_path(doc: &mut Value, key: &str, value: Value) -> ConfigResult<()> {
    ensure(!key.is_empty() && key.split('.').all(|p| !p.is_empty()), key, "empty key segment")?;
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = match node {
            Value::Object(m) => m,
            Value::Null => {
                *node = Value::Object(Map::new());
                node.as_object_mut().expect("just created")
            }
            _ => return Err(ConfigError::new(parts[..i].join("."), "is not an object and cannot take sub-keys")),
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("loop returns on the last segment")
}

/// Removes a top-level key.
pub fn take(doc: &mut Value, key: &str) -> Option<Value> {
    doc.as_object_mut().and_then(|m| m.remove(key))
}

/// Deserializes with the failing key path in the error.
pub fn parse<T: DeserializeOwned>(doc: &Value) -> ConfigResult<T> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        let key = if path == "." { String::new() } else { path };
        ConfigError::new(key, e.into_inner())
    })
}

#[cfg(test)]
mod tests {
    use serde::Deserialize;
    use serde_json::json;

    use super::*;

    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    #[allow(dead_code)]
    struct Inner {
        dt: f64,
    }

    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    #[allow(dead_code)]
    struct Outer {
        inner: Inner,
        name: Option<String>,
    }

    #[test]
    fn override_parses_json_or_string() {
        let mut doc = json!({"a": 1});
        apply_override(&mut doc, "a=2.5").unwrap();
        apply_override(&mut doc, "b.c=[1,2]").unwrap();
        apply_override(&mut doc, "name=kgu1").unwrap();
        assert_eq!(doc, json!({"a": 2.5, "b": {"c": [1, 2]}, "name": "kgu1"}));
    }

    #[test]
    fn override_needs_equals_sign() {
        let err = apply_override(&mut json!({}), "dt").unwrap_err();
        assert_eq!(err.key, "dt");
    }

    #[test]
    fn override_into_scalar_is_rejected() {
        let err = apply_override(&mut json!({"a": 1}), "a.b=2").unwrap_err();
        assert_eq!(err.key, "a");
    }

    #[test]
    fn parse_errors_name_the_key() {
        let err = parse::<Outer>(&json!({"inner": {"dt": "x"}})).unwrap_err();
        assert_eq!(err.key, "inner.dt");
        let err = parse::<Outer>(&json!({"inner": {"dt": 1.0, "dx": 2}})).unwrap_err();
        assert!(err.message.contains("dx"), "{err}");
        let err = parse::<Outer>(&json!({"inner": {"dt": 1.0}, "nmae": "a"})).unwrap_err();
        assert!(err.to_string().contains("nmae"), "{err}");
    }
}
