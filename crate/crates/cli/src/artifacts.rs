//! On-disk artifact formats: path sets and coefficient tables as CSV,
//! checkpoints, augmentation metadata and the run manifest as versioned
//! JSON. Float formatting uses Rust's shortest-roundtrip display, so
//! identical runs produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sigflow::{AugmentMap, Error, FamilyKind, Result, SampledPath, ScoreCheckpoint};

/// Run manifest: enough to re-run any stage and to check that downstream
/// artifacts belong to the same coordinate system.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    /// Lyndon-coordinate fingerprint; empty until the embed stage runs.
    pub fingerprint: String,
    /// Stage name -> artifact files it wrote.
    pub stages: BTreeMap<String, Vec<String>>,
}

impl Manifest {
    pub fn new(config_hash: String, seed: u64) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            seed,
            fingerprint: String::new(),
            stages: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, stage: &str, artifacts: &[&str]) {
        self.stages
            .insert(stage.to_string(), artifacts.iter().map(|s| s.to_string()).collect());
    }
}

pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    out.join("manifest.json")
}

pub fn load_manifest(out: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(manifest_path(out))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("corrupt manifest.json: {e}")))
}

pub fn save_manifest(out: &Path, m: &Manifest) -> Result<()> {
    fs::create_dir_all(out)?;
    let text = serde_json::to_string_pretty(m)
        .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
    fs::write(manifest_path(out), text + "\n")?;
    Ok(())
}

/// Load the manifest or start a fresh one, verifying hash/seed coherence
/// when one exists.
pub fn open_manifest(out: &Path, config_hash: &str, seed: u64) -> Result<Manifest> {
    if manifest_path(out).exists() {
        let m = load_manifest(out)?;
        if m.config_hash != config_hash || m.seed != seed {
            return Err(Error::Config(
                "existing manifest was produced by a different config or seed; \
                 use a fresh output directory"
                    .into(),
            ));
        }
        Ok(m)
    } else {
        Ok(Manifest::new(config_hash.to_string(), seed))
    }
}

/// Augmentation and coordinate-system metadata shared by every path of a
/// dataset embedding; consumed by the invert stage.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EmbedInfo {
    /// None = Fourier; Some = orthogonal-polynomial family.
    pub family: Option<FamilyKind>,
    pub order: usize,
    pub depth: usize,
    pub mirror: bool,
    pub channels: usize,
    /// Augmented path dimension (4 Fourier, 2 polynomial).
    pub aug_dim: usize,
    /// Log-signature width per channel.
    pub block_width: usize,
    pub map: AugmentMap,
    pub fingerprint: String,
}

pub fn save_embed_info(out: &Path, info: &EmbedInfo) -> Result<()> {
    let text = serde_json::to_string_pretty(info)
        .map_err(|e| Error::Config(format!("augment metadata serialization: {e}")))?;
    fs::write(out.join("augment.json"), text + "\n")?;
    Ok(())
}

pub fn load_embed_info(out: &Path) -> Result<EmbedInfo> {
    let text = fs::read_to_string(out.join("augment.json"))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("corrupt augment.json: {e}")))
}

pub fn save_checkpoint(path: &Path, ckpt: &ScoreCheckpoint) -> Result<()> {
    let text = serde_json::to_string(ckpt)
        .map_err(|e| Error::Config(format!("checkpoint serialization: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ScoreCheckpoint> {
    let text = fs::read_to_string(path)?;
    let ckpt: ScoreCheckpoint = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("corrupt checkpoint: {e}")))?;
    if ckpt.version != sigflow::diffusion::CHECKPOINT_VERSION {
        return Err(Error::Config(format!(
            "checkpoint version {} unsupported (expected {})",
            ckpt.version,
            sigflow::diffusion::CHECKPOINT_VERSION
        )));
    }
    Ok(ckpt)
}

/// Path sets: one row per timestamp with a leading path index,
/// `path,time,c0,..,c{D-1}`.
pub fn write_paths_csv(path: &Path, paths: &[SampledPath]) -> Result<()> {
    let dim = paths.first().map(|p| p.dim()).unwrap_or(1);
    let mut s = String::from("path,time");
    for c in 0..dim {
        let _ = write!(s, ",c{c}");
    }
    s.push('\n');
    for (i, p) in paths.iter().enumerate() {
        for k in 0..p.len() {
            let _ = write!(s, "{i},{}", p.times()[k]);
            for c in 0..p.dim() {
                let _ = write!(s, ",{}", p.value(k, c));
            }
            s.push('\n');
        }
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_paths_csv(path: &Path) -> Result<Vec<SampledPath>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse { row: 1, msg: "empty path CSV".into() })?
        .1;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "path" || cols[1] != "time" {
        return Err(Error::Parse {
            row: 1,
            msg: format!("expected header path,time,c0,..., got {header:?}"),
        });
    }
    let dim = cols.len() - 2;
    let mut out: Vec<SampledPath> = Vec::new();
    let mut cur: Option<usize> = None;
    let mut times: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut flush = |times: &mut Vec<f64>, values: &mut Vec<f64>| -> Result<()> {
        if !times.is_empty() {
            out.push(SampledPath::new(std::mem::take(times), std::mem::take(values), dim)?);
        }
        Ok(())
    };
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = lineno + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != dim + 2 {
            return Err(Error::Parse {
                row,
                msg: format!("expected {} fields, found {}", dim + 2, cells.len()),
            });
        }
        let pidx: usize = cells[0]
            .parse()
            .map_err(|_| Error::Parse { row, msg: format!("bad path index {:?}", cells[0]) })?;
        if cur != Some(pidx) {
            flush(&mut times, &mut values)?;
            cur = Some(pidx);
        }
        let t: f64 = cells[1]
            .parse()
            .map_err(|_| Error::Parse { row, msg: format!("bad time {:?}", cells[1]) })?;
        times.push(t);
        for cell in &cells[2..] {
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Parse { row, msg: format!("bad value {cell:?}") })?;
            values.push(v);
        }
    }
    flush(&mut times, &mut values)?;
    if out.is_empty() {
        return Err(Error::Input(format!("no paths in {}", path.display())));
    }
    Ok(out)
}

/// Flat vector tables (embeddings, samples): a header naming each
/// coordinate, then one row per vector.
pub fn write_vectors_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                s.push(',');
            }
            let _ = write!(s, "{v}");
            first = false;
        }
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_vectors_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse { row: 1, msg: "empty vector CSV".into() })?
        .1
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>> = line
            .split(',')
            .map(|cell| {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    row: lineno + 1,
                    msg: format!("bad value {cell:?}"),
                })
            })
            .collect();
        let row = row?;
        if row.len() != header.len() {
            return Err(Error::Parse {
                row: lineno + 1,
                msg: format!("expected {} fields, found {}", header.len(), row.len()),
            });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_roundtrip() {
        let dir = std::env::temp_dir().join("sigflow_artifacts_test");
        fs::create_dir_all(&dir).unwrap();
        let paths = sigflow::gen_sines(3, 8, 2, 1.0, 5);
        let file = dir.join("paths.csv");
        write_paths_csv(&file, &paths).unwrap();
        let back = read_paths_csv(&file).unwrap();
        assert_eq!(paths, back);
    }

    #[test]
    fn vectors_roundtrip() {
        let dir = std::env::temp_dir().join("sigflow_artifacts_test");
        fs::create_dir_all(&dir).unwrap();
        let file = dir.join("vecs.csv");
        let header = vec!["c0:1".to_string(), "c0:2".to_string()];
        let rows = vec![vec![1.5, -2.25], vec![0.1, 1e-9]];
        write_vectors_csv(&file, &header, &rows).unwrap();
        let (h, r) = read_vectors_csv(&file).unwrap();
        assert_eq!(h, header);
        assert_eq!(r, rows);
    }

    #[test]
    fn manifest_guard() {
        let dir = std::env::temp_dir().join("sigflow_manifest_test");
        let _ = fs::remove_dir_all(&dir);
        let mut m = open_manifest(&dir, "abc", 7).unwrap();
        m.record("gen-data", &["data.csv"]);
        save_manifest(&dir, &m).unwrap();
        assert!(open_manifest(&dir, "abc", 7).is_ok());
        assert!(open_manifest(&dir, "other", 7).is_err());
        assert!(open_manifest(&dir, "abc", 8).is_err());
    }
}
