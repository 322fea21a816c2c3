//! Optional `triggerforge.toml` next to the input file (or in the current
//! directory) supplying oracle defaults.  Command-line flags always win.

use std::path::Path;

#[derive(Debug, Clone, Copy, Default)]
pub struct Config {
    pub cap: Option<usize>,
    pub seeds: Option<usize>,
}

/// Loads the nearest config: the input file's directory first, then the
/// working directory.  A malformed file is an error; a missing one is not.
pub fn load_config(input: &Path) -> Result<Config, String> {
    let mut candidates = Vec::new();
    if let Some(dir) = input.parent() {
        candidates.push(dir.join("triggerforge.toml"));
    }
    candidates.push(Path::new("triggerforge.toml").to_path_buf());
    for path in candidates {
        let Ok(text) = std::fs::read_to_string(&path) else {
            continue;
        };
        let value: toml::Value = text
            .parse()
            .map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg = Config::default();
        if let Some(oracle) = value.get("oracle") {
            cfg.cap = read_count(oracle, "cap", &path)?;
            cfg.seeds = read_count(oracle, "seeds", &path)?;
        }
        return Ok(cfg);
    }
    Ok(Config::default())
}

fn read_count(table: &toml::Value, key: &str, path: &Path) -> Result<Option<usize>, String> {
    match table.get(key) {
        None => Ok(None),
        Some(v) => {
            let n = v
                .as_integer()
                .filter(|n| *n >= 0)
                .ok_or_else(|| format!("{}: `oracle.{key}` must be a nonnegative integer", path.display()))?;
            Ok(Some(n as usize))
        }
    }
}
