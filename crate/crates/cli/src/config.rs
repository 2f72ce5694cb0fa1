use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use qfc_core::sweep::FixedParams;
use serde::Serialize;

use crate::args::GlobalArgs;
use crate::error::CliError;

const KEYS: [&str; 7] = ["gamma3", "rho1", "rho3", "pump", "r", "omega", "seed"];

/// Parameters after applying defaults, then the config file, then flags.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Resolved {
    #[serde(flatten)]
    pub fixed: FixedParams,
    pub seed: Option<u64>,
}

pub fn load(path: &Path) -> Result<BTreeMap<String, f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let map = if text.trim_start().starts_with('{') {
        serde_json::from_str::<BTreeMap<String, f64>>(&text)
            .map_err(|e| CliError::Usage(format!("bad JSON config: {e}")))?
    } else {
        parse_key_values(&text)?
    };
    if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("unknown config key `{k}`")));
    }
    Ok(map)
}

fn parse_key_values(text: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", n + 1)))?;
        let v = v
            .trim()
            .parse::<f64>()
            .map_err(|e| CliError::Usage(format!("config line {}: {e}", n + 1)))?;
        map.insert(k.trim().to_string(), v);
    }
    Ok(map)
}

pub fn resolve(g: &GlobalArgs) -> Result<Resolved, CliError> {
    let file = match &g.config {
        Some(p) => load(p)?,
        None => BTreeMap::new(),
    };
    let pick = |flag: Option<f64>, key: &str, default: f64| {
        flag.or(file.get(key).copied()).unwrap_or(default)
    };
    let d = FixedParams::default();
    let seed = match (g.seed, file.get("seed")) {
        (Some(s), _) => Some(s),
        (None, Some(&s)) if s >= 0.0 && s.fract() == 0.0 && s <= u64::MAX as f64 => Some(s as u64),
        (None, Some(s)) => {
            return Err(CliError::Usage(format!(
                "config seed {s} is not a non-negative integer"
            )))
        }
        (None, None) => None,
    };
    Ok(Resolved {
        fixed: FixedParams {
            gamma3: pick(g.gamma3, "gamma3", d.gamma3),
            rho1: pick(g.rho1, "rho1", d.rho1),
            rho3: pick(g.rho3, "rho3", d.rho3),
            pump: pick(g.pump, "pump", d.pump),
            r: pick(g.r, "r", d.r),
            omega: pick(g.omega, "omega", d.omega),
        },
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values() {
        let m = parse_key_values("# cavity\ngamma3 = 1.4\n\nr=2 # strong\n").unwrap();
        assert_eq!(m["gamma3"], 1.4);
        assert_eq!(m["r"], 2.0);
        assert!(parse_key_values("gamma3 1.4").is_err());
        assert!(parse_key_values("r = x").is_err());
    }
}
