use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{HarnessError, HarnessResult, RunConfig, RunSummary};
use crate::samplers::ChainTrace;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Provenance of one command invocation. The wall time lives only here;
/// the files it lists carry no timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub seeds: Value,
    pub wall_time_seconds: f64,
    pub files: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("JSON values serialize");
    out.push(b'\n');
    out
}

/// Shortest decimal that parses back to the same `f64`, in the same form
/// as the JSON outputs.
fn num(v: f64) -> String {
    match serde_json::Number::from_f64(v) {
        Some(n) => n.to_string(),
        None => format!("{v}"),
    }
}

pub(crate) fn trace_csv(trace: &ChainTrace, dim: usize, with_duals: bool) -> String {
    let mut s = String::from("step");
    for i in 0..dim {
        write!(s, ",x{i}").unwrap();
    }
    if with_duals {
        for i in 0..dim {
            write!(s, ",y{i}").unwrap();
        }
    }
    s.push_str(",feasible\n");
    for (k, step) in trace.steps.iter().enumerate() {
        write!(s, "{step}").unwrap();
        for v in trace.primal[k].coords() {
            write!(s, ",{}", num(*v)).unwrap();
        }
        if with_duals {
            for v in trace.duals[k].coords() {
                write!(s, ",{}", num(*v)).unwrap();
            }
        }
        writeln!(s, ",{}", u8::from(trace.feasible_flags[k])).unwrap();
    }
    s
}

/// Linear-interpolation empirical quantile of sorted data.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let i = h.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
}

/// Equal-width bins over the 0.1%–99.9% empirical quantile range; values
/// outside the range are not counted.
pub(crate) fn histogram_csv(values: &[f64], bins: usize) -> String {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (
        sorted_quantile(&sorted, 0.001),
        sorted_quantile(&sorted, 0.999),
    );
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &sorted {
        if v < lo || v > hi {
            continue;
        }
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let mut s = String::from("bin_left,bin_right,count\n");
    for (b, c) in counts.iter().enumerate() {
        let left = lo + b as f64 * width;
        let right = if b + 1 == bins {
            hi
        } else {
            lo + (b + 1) as f64 * width
        };
        writeln!(s, "{},{},{c}", num(left), num(right)).unwrap();
    }
    s
}

pub(crate) fn convergence_csv(rows: &[(usize, f64)]) -> String {
    let mut s = String::from("step,frobenius_to_mstar\n");
    for (step, v) in rows {
        writeln!(s, "{step},{}", num(*v)).unwrap();
    }
    s
}

fn write_file(path: &Path, bytes: &[u8]) -> HarnessResult<()> {
    std::fs::write(path, bytes).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the outputs and the manifest that lists them.
pub(crate) fn finish(
    out_dir: &Path,
    command: &str,
    cfg: &RunConfig,
    seeds: Value,
    started: Instant,
    files: Vec<(String, Vec<u8>)>,
) -> HarnessResult<RunSummary> {
    std::fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut digests = Vec::with_capacity(files.len());
    for (name, bytes) in &files {
        write_file(&out_dir.join(name), bytes)?;
        digests.push(FileDigest {
            name: name.clone(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
    }
    let manifest = RunManifest {
        artifact: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config: cfg.clone(),
        seeds,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        files: digests,
    };
    let value = serde_json::to_value(&manifest).expect("manifest serializes");
    write_file(&out_dir.join("manifest.json"), &json_bytes(&value))?;
    log::info!(
        "wrote {} files to {}",
        manifest.files.len() + 1,
        out_dir.display()
    );
    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        manifest,
    })
}
