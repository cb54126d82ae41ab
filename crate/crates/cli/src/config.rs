//! Key=value config files providing defaults for flags.
//!
//! Precedence is flag over config over built-in default, resolved field by
//! field, so a config can pin resource caps for a whole sweep while single
//! runs still override the budget on the command line.

use std::path::PathBuf;

use latshell::{Error, Result};

/// Defaults loaded from a config file; every field is optional and `None`
/// means "use the built-in default unless a flag says otherwise".
#[derive(Debug, Clone, Default)]
pub struct Config {
    pub budget_secs: Option<u64>,
    pub node_limit: Option<u64>,
    pub target_weight: Option<u64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub max_vertices: Option<usize>,
    pub pair_scan_budget: Option<u128>,
    pub shell_cap: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

impl Config {
    /// Parse `key = value` lines; `#` starts a comment, blank lines are
    /// skipped, unknown keys are errors so typos do not pass silently.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::MalformedFile {
                format: "config",
                line: idx + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            macro_rules! num {
                ($ty:ty) => {
                    value
                        .parse::<$ty>()
                        .map_err(|_| bad(format!("bad value for {key}: {value:?}")))?
                };
            }
            match key {
                "budget_secs" => cfg.budget_secs = Some(num!(u64)),
                "node_limit" => cfg.node_limit = Some(num!(u64)),
                "target_weight" => cfg.target_weight = Some(num!(u64)),
                "seed" => cfg.seed = Some(num!(u64)),
                "threads" => cfg.threads = Some(num!(usize)),
                "max_vertices" => cfg.max_vertices = Some(num!(usize)),
                "pair_scan_budget" => cfg.pair_scan_budget = Some(num!(u128)),
                "shell_cap" => cfg.shell_cap = Some(num!(u64)),
                "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
                "cache_dir" => cfg.cache_dir = Some(PathBuf::from(value)),
                other => return Err(bad(format!("unknown config key {other:?}"))),
            }
        }
        Ok(cfg)
    }
}
