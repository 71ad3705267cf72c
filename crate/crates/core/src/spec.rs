//! Parser for registry names of the form `name` or `name(key=value, ...)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EntrySpec {
    pub name: String,
    pub args: Vec<(String, f64)>,
}

impl EntrySpec {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.args.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn get_or(&self, key: &str, default: f64) -> f64 {
        self.get(key).unwrap_or(default)
    }

    /// Reject arguments not in `allowed`.
    pub fn expect_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.args {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::BadSpec(format!("`{}` takes no argument `{}`", self.name, k)));
            }
        }
        Ok(())
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parse `gaussian(sigma=1)` or `random_competitive(n=5, seed=3)`.
/// Values are plain decimal floats; duplicate keys are rejected.
pub fn parse_spec(input: &str) -> Result<EntrySpec> {
    let s = input.trim();
    let (name, rest) = match s.find('(') {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let name = name.trim();
    if !is_ident(name) {
        return Err(Error::BadSpec(format!("bad name in `{input}`")));
    }
    let mut args: Vec<(String, f64)> = Vec::new();
    if let Some(rest) = rest {
        let body = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::BadSpec(format!("missing `)` in `{input}`")))?;
        if body.contains('(') || body.contains(')') {
            return Err(Error::BadSpec(format!("nested parentheses in `{input}`")));
        }
        if !body.trim().is_empty() {
            for part in body.split(',') {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| Error::BadSpec(format!("expected key=value, got `{}`", part.trim())))?;
                let k = k.trim();
                if !is_ident(k) {
                    return Err(Error::BadSpec(format!("bad key `{k}`")));
                }
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::BadSpec(format!("bad number `{}` for `{k}`", v.trim())))?;
                if !v.is_finite() {
                    return Err(Error::BadSpec(format!("non-finite value for `{k}`")));
                }
                if args.iter().any(|(e, _)| e == k) {
                    return Err(Error::BadSpec(format!("duplicate key `{k}`")));
                }
                args.push((k.to_string(), v));
            }
        }
    }
    Ok(EntrySpec { name: name.to_string(), args })
}
