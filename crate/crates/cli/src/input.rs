use std::path::Path;

use anyhow::{anyhow, Context};
use finsler_core::catalog::catalog_file;
use finsler_core::{parse_map, parse_metric, MapDef, MetricDef};

use crate::output::{Failure, EXIT_USAGE};

/// `catalog:NAME` reads a bundled file (the `.metric` / `.map` suffix may
/// be left out); anything else is a filesystem path.
fn read(path: &Path, suffix: &str) -> Result<String, Failure> {
    let shown = path.display().to_string();
    if let Some(name) = shown.strip_prefix("catalog:") {
        let with_suffix = if name.ends_with(suffix) {
            name.to_string()
        } else {
            format!("{name}{suffix}")
        };
        return catalog_file(&with_suffix)
            .map(str::to_string)
            .ok_or_else(|| Failure::new(EXIT_USAGE, anyhow!("no bundled file named {with_suffix}")));
    }
    std::fs::read_to_string(path)
        .with_context(|| format!("reading {shown}"))
        .map_err(|e| Failure::new(EXIT_USAGE, e))
}

pub fn load_metric(path: &Path) -> Result<MetricDef, Failure> {
    let text = read(path, ".metric")?;
    parse_metric(&text).map_err(|e| Failure::new(EXIT_USAGE, anyhow!("{}: {e}", path.display())))
}

pub fn load_map(path: &Path) -> Result<MapDef, Failure> {
    let text = read(path, ".map")?;
    parse_map(&text).map_err(|e| Failure::new(EXIT_USAGE, anyhow!("{}: {e}", path.display())))
}
