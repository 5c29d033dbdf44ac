use std::fs;
use std::path::PathBuf;

use fil::error::Result;
use serde_json::{json, Value};

use crate::config::RunConfig;

pub const SCHEMA: &str = "fil-report-v1";

/// `<out>/<name>.json` holding the schema tag, the config, its hash and
/// the command result.
pub fn write_json(cfg: &RunConfig, name: &str, result: Value) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(format!("{name}.json"));
    let doc = json!({
        "schema": SCHEMA,
        "command": cfg.command,
        "config_hash": cfg.hash(),
        "config": cfg,
        "result": result,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

/// `<out>/<name>.csv`; the first line is a comment with the config hash,
/// the second the column header.
pub fn write_csv(cfg: &RunConfig, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(format!("{name}.csv"));
    fs::write(&path, format!("# {SCHEMA} config_hash={}\n{body}", cfg.hash()))?;
    Ok(path)
}
