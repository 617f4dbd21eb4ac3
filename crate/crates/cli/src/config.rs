use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::CliError;

/// Flat `key = value` settings after merging the config file and overrides.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_").to_ascii_lowercase()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(k) => &raw[..k],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected key=value, got {raw:?}", n + 1)));
            };
            let key = normalize_key(k);
            if key.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", n + 1)));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key {key}", n + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(normalize_key(key), value.trim().to_string());
    }

    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<(), CliError> {
        let unknown: Vec<&str> = self
            .values
            .keys()
            .map(String::as_str)
            .filter(|k| !allowed.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "unknown key(s): {} (allowed: {})",
                unknown.join(", "),
                allowed.join(", ")
            )))
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.values.get(key).map(String::as_str).unwrap_or(default)
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.values
            .get(key)
            .map(|v| parse_number(v).ok_or_else(|| CliError::Config(format!("{key}: not a finite number: {v:?}"))))
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("{key}: not a non-negative integer: {v:?}"))),
        }
    }

    /// Evenly spaced grid `<name>_min ..= <name>_max` with `<name>_count` points.
    pub fn grid(&self, name: &str, min: f64, max: f64, count: usize) -> Result<Vec<f64>, CliError> {
        let lo = self.f64_or(&format!("{name}_min"), min)?;
        let hi = self.f64_or(&format!("{name}_max"), max)?;
        let n = self.usize_or(&format!("{name}_count"), count)?;
        if n < 2 {
            return Err(CliError::Config(format!("{name}_count must be at least 2, got {n}")));
        }
        if !(hi > lo) {
            return Err(CliError::Config(format!("{name}_max must exceed {name}_min")));
        }
        Ok((0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                lo * (1.0 - s) + hi * s
            })
            .collect())
    }
}

/// Decimal number with an optional `pi` factor: `0.25`, `pi`, `-0.088pi`, `2*pi`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim().to_ascii_lowercase();
    let value = match s.strip_suffix("pi") {
        Some(head) => {
            let head = head.trim().trim_end_matches('*').trim();
            let factor = match head {
                "" | "+" => 1.0,
                "-" => -1.0,
                h => h.parse::<f64>().ok()?,
            };
            factor * PI
        }
        None => s.parse::<f64>().ok()?,
    };
    value.is_finite().then_some(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("pi"), Some(PI));
        assert_eq!(parse_number("-pi"), Some(-PI));
        assert_eq!(parse_number("0.5pi"), Some(0.5 * PI));
        assert_eq!(parse_number("2 * pi"), Some(2.0 * PI));
        assert_eq!(parse_number("-0.13"), Some(-0.13));
        assert_eq!(parse_number("nan"), None);
        assert_eq!(parse_number("x"), None);
    }

    #[test]
    fn parses_comments_and_rejects_duplicates() {
        let c = RunConfig::parse("# header\nj = 0.1  # coupling\n\ndelta-min=-0.5\n").unwrap();
        assert_eq!(c.f64_or("j", 0.0).unwrap(), 0.1);
        assert_eq!(c.f64_or("delta_min", 0.0).unwrap(), -0.5);
        assert!(RunConfig::parse("j=1\nj=2").is_err());
        assert!(RunConfig::parse("novalue").is_err());
    }

    #[test]
    fn grid_hits_both_ends() {
        let c = RunConfig::parse("x_min=0\nx_max=pi\nx_count=7").unwrap();
        let g = c.grid("x", 0.0, 1.0, 2).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[6], PI);
        let sym = RunConfig::parse("x_min=-0.3\nx_max=0.3\nx_count=11").unwrap();
        assert_eq!(sym.grid("x", 0.0, 1.0, 2).unwrap()[5], 0.0);
        assert!(c.grid("y", 1.0, 0.0, 3).is_err());
    }
}
