//! Config-file loading and flag/config/default resolution.
//!
//! Config files are plain `key=value` lines with `#` comments. Flags always
//! override config values; unknown keys are rejected up front so typos fail
//! loudly instead of silently using a default.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use opo_steering::Error as CoreError;

/// Failure classes mapped onto process exit codes: usage errors exit 2,
/// numeric/runtime failures exit 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
}

impl Failure {
    pub fn from_core(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_) | CoreError::UnknownMode(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Numeric(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

const KNOWN_KEYS: &[&str] = &[
    "a", "b", "bipartitions", "bpart", "c", "chi", "format", "integrals", "modes", "pair",
    "power", "res", "scale", "t", "theta", "theta_pi", "tol", "x", "x_range", "y", "y_range",
];

/// Parsed config file contents (empty when no file was given).
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Failure::Usage(format!(
                        "config {} line {}: expected key=value, got '{line}'",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                let key = key.trim();
                if !KNOWN_KEYS.contains(&key) {
                    return Err(Failure::Usage(format!(
                        "config {} line {}: unknown key '{key}'",
                        path.display(),
                        lineno + 1
                    )));
                }
                values.insert(key.to_string(), value.trim().to_string());
            }
        }
        Ok(Self { values })
    }

    /// Config value for `key`, parsed; `None` when absent.
    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Failure::Usage(format!("config key '{key}': cannot parse '{raw}'"))
            }),
        }
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Comma-separated 1-based mode list, e.g. "1,3".
pub fn parse_modes(s: &str) -> CliResult<Vec<usize>> {
    let mut modes = Vec::new();
    for part in s.split(',') {
        let m: usize = part
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("invalid mode '{part}' in '{s}'")))?;
        if !(1..=5).contains(&m) {
            return Err(Failure::Usage(format!("mode {m} does not exist (1..=5)")));
        }
        if modes.contains(&m) {
            return Err(Failure::Usage(format!("duplicate mode {m} in '{s}'")));
        }
        modes.push(m);
    }
    if modes.is_empty() {
        return Err(Failure::Usage(format!("empty mode list '{s}'")));
    }
    Ok(modes)
}

/// Digit-string party, e.g. "12" → modes [1, 2].
fn parse_party(s: &str) -> CliResult<Vec<usize>> {
    if s.is_empty() {
        return Err(Failure::Usage("empty party in bipartition".to_string()));
    }
    let mut modes = Vec::new();
    for ch in s.chars() {
        let m = ch
            .to_digit(10)
            .filter(|d| (1..=5).contains(d))
            .ok_or_else(|| Failure::Usage(format!("invalid mode '{ch}' in party '{s}'")))?
            as usize;
        if modes.contains(&m) {
            return Err(Failure::Usage(format!("duplicate mode {m} in party '{s}'")));
        }
        modes.push(m);
    }
    Ok(modes)
}

/// Bipartition list like "3:12,4:12,5:12" (steering party : steered party).
pub fn parse_bipartitions(s: &str) -> CliResult<Vec<opo_steering::Bipartition>> {
    let mut parts = Vec::new();
    for token in s.split(',') {
        let (a, b) = token
            .trim()
            .split_once(':')
            .ok_or_else(|| Failure::Usage(format!("bipartition '{token}' is not A:B")))?;
        let part = opo_steering::Bipartition::new(parse_party(a)?, parse_party(b)?)
            .map_err(Failure::from_core)?;
        parts.push(part);
    }
    if parts.is_empty() {
        return Err(Failure::Usage(format!("empty bipartition list '{s}'")));
    }
    Ok(parts)
}

/// "lo,hi" range.
pub fn parse_range(s: &str) -> CliResult<(f64, f64)> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| Failure::Usage(format!("range '{s}' is not lo,hi")))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("invalid range bound '{lo}'")))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("invalid range bound '{hi}'")))?;
    Ok((lo, hi))
}
