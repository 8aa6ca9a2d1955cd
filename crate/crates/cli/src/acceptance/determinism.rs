//! Byte-identical experiment output across repeated runs and job counts.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Result;

use super::Outcome;
use crate::config::ExperimentConfig;
use crate::experiment::run_experiment;

const CONFIG: &str = r#"
task = "minimax_regression"
K_grid = [64, 128, 256]
seeds = [1, 2, 3]

[task_params]
data_seed = 5

[[algorithms]]
variant = "variant2"

[[algorithms]]
variant = "storm"

[[algorithms]]
variant = "clipped_scfw"
clip = 2.0
"#;

/// Relative path to contents for every file below `root`.
fn snapshot(root: &Path) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root)?.to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path)?);
            }
        }
    }
    Ok(out)
}

pub(super) fn end_to_end() -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let mut cfg = ExperimentConfig::from_toml(CONFIG)?;
    let mut snaps = Vec::new();
    for (name, jobs) in [("first", 1), ("second", 1), ("parallel", 4)] {
        cfg.output_dir = tmp.path().join(name);
        run_experiment(&cfg, jobs)?;
        snaps.push(snapshot(&cfg.output_dir)?);
    }
    let repeat = snaps[0] == snaps[1];
    let jobs = snaps[0] == snaps[2];
    let files = snaps[0].len();
    let bytes: usize = snaps[0].values().map(Vec::len).sum();
    Ok(Outcome {
        passed: repeat && jobs && files == 3 * 3 * 3 + 3,
        measured: format!("{files} files ({bytes} bytes); identical on rerun {repeat}; identical for jobs 1 vs 4 {jobs}"),
    })
}
