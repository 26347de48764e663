//! `--set key.path=value` overrides applied to the config document before it
//! is validated.

use kite_core::{Error, Result};
use toml::{Table, Value};

fn parse_value(raw: &str) -> Value {
    // Bare words that are not TOML literals are taken as strings.
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

pub fn apply(text: &str, overrides: &[String]) -> Result<String> {
    if overrides.is_empty() {
        return Ok(text.to_string());
    }
    let bad = |msg: String| Error::Config(msg);
    let mut doc: Table =
        toml::from_str(text).map_err(|e| Error::Parse { what: "configuration".into(), msg: e.to_string() })?;
    for item in overrides {
        let (key, raw) = item.split_once('=').ok_or_else(|| bad(format!("override `{item}` is not KEY=VALUE")))?;
        let path: Vec<&str> = key.trim().split('.').collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(bad(format!("override key `{key}` is malformed")));
        }
        let (last, parents) = path.split_last().expect("split yields at least one part");
        let mut table = &mut doc;
        for part in parents {
            table = table
                .entry(part.to_string())
                .or_insert_with(|| Value::Table(Table::new()))
                .as_table_mut()
                .ok_or_else(|| bad(format!("override key `{key}`: `{part}` is not a section")))?;
        }
        table.insert(last.to_string(), parse_value(raw.trim()));
    }
    toml::to_string(&doc).map_err(|e| Error::Parse { what: "configuration".into(), msg: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_keys_and_literals() {
        let out =
            apply("a = 1\n[flow]\nv = 1.5\n", &["flow.v=2.0".into(), "name=abc".into(), "x.y=[1, 2]".into()]).unwrap();
        let t: Table = toml::from_str(&out).unwrap();
        assert_eq!(t["flow"]["v"].as_float(), Some(2.0));
        assert_eq!(t["name"].as_str(), Some("abc"));
        assert_eq!(t["x"]["y"].as_array().unwrap().len(), 2);
        assert!(apply("a = 1", &["a.b=2".into()]).is_err());
        assert!(apply("a = 1", &["novalue".into()]).is_err());
    }
}
