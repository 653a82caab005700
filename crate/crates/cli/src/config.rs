//! Pipeline configuration: plain-text key = value files with command-line
//! overrides, canonical serialization, and a stable hash.

use std::fmt::Write as _;
use std::path::Path;

use sigflow::{Error, FamilyKind, OrthoFamily, Result};

/// Everything a pipeline run needs. Field defaults reproduce the reference
/// setup (linear VP schedule 0.1..5, Adam 1e-3, batch 128, 1200 epochs,
/// 128-step probability-flow sampling).
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    // data
    pub dataset: String,
    pub count: usize,
    pub length: usize,
    pub channels: usize,
    pub freq_scale: f64,
    pub hurst: f64,
    pub prey_x: (f64, f64),
    pub prey_y: (f64, f64),
    pub csv_path: String,
    pub csv_window: usize,
    pub csv_stride: usize,
    pub csv_channels: Vec<usize>,
    pub csv_time_column: Option<usize>,
    pub csv_has_header: bool,
    // embedding / inversion
    pub basis: String,
    pub jacobi_alpha: f64,
    pub jacobi_beta: f64,
    pub hermite_eps: f64,
    pub order: usize,
    /// 0 means "order + 2".
    pub depth: usize,
    pub mirror: String,
    // diffusion
    pub beta_min: f64,
    pub beta_max: f64,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    pub emb_width: usize,
    pub sample_count: usize,
    // evaluation
    pub timepoints: Vec<usize>,
    pub ks_repeats: usize,
    pub ks_batch: usize,
    pub sweep_orders: Vec<usize>,
    pub sweep_bases: Vec<String>,
    // global
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset: "sines".into(),
            count: 256,
            length: 100,
            channels: 1,
            freq_scale: 1.0,
            hurst: 0.7,
            prey_x: (0.5, 1.5),
            prey_y: (0.5, 1.5),
            csv_path: String::new(),
            csv_window: 1000,
            csv_stride: 200,
            csv_channels: vec![0],
            csv_time_column: None,
            csv_has_header: true,
            basis: "fourier".into(),
            jacobi_alpha: 0.5,
            jacobi_beta: 0.0,
            hermite_eps: 0.05,
            order: 2,
            depth: 0,
            mirror: "auto".into(),
            beta_min: 0.1,
            beta_max: 5.0,
            epochs: 1200,
            batch: 128,
            learning_rate: 1e-3,
            hidden: 64,
            emb_width: 16,
            sample_count: 256,
            timepoints: vec![25, 50, 75],
            ks_repeats: 1000,
            ks_batch: 64,
            sweep_orders: vec![2, 4, 6, 8, 10],
            sweep_bases: vec!["fourier".into(), "legendre".into()],
            seed: 0,
        }
    }
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| Error::Config(format!("{key}: expected an integer, got {v:?}")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse().map_err(|_| Error::Config(format!("{key}: expected a number, got {v:?}")))
}

fn parse_usize_list(key: &str, v: &str) -> Result<Vec<usize>> {
    v.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_usize(key, p.trim()))
        .collect()
}

impl PipelineConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "dataset" => self.dataset = v.to_string(),
            "count" => self.count = parse_usize(key, v)?,
            "length" => self.length = parse_usize(key, v)?,
            "channels" => self.channels = parse_usize(key, v)?,
            "freq_scale" => self.freq_scale = parse_f64(key, v)?,
            "hurst" => self.hurst = parse_f64(key, v)?,
            "prey_x_min" => self.prey_x.0 = parse_f64(key, v)?,
            "prey_x_max" => self.prey_x.1 = parse_f64(key, v)?,
            "prey_y_min" => self.prey_y.0 = parse_f64(key, v)?,
            "prey_y_max" => self.prey_y.1 = parse_f64(key, v)?,
            "csv_path" => self.csv_path = v.to_string(),
            "csv_window" => self.csv_window = parse_usize(key, v)?,
            "csv_stride" => self.csv_stride = parse_usize(key, v)?,
            "csv_channels" => self.csv_channels = parse_usize_list(key, v)?,
            "csv_time_column" => {
                self.csv_time_column =
                    if v.is_empty() || v == "none" { None } else { Some(parse_usize(key, v)?) }
            }
            "csv_has_header" => {
                self.csv_has_header = v
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: expected true/false")))?
            }
            "basis" => self.basis = v.to_string(),
            "jacobi_alpha" => self.jacobi_alpha = parse_f64(key, v)?,
            "jacobi_beta" => self.jacobi_beta = parse_f64(key, v)?,
            "hermite_eps" => self.hermite_eps = parse_f64(key, v)?,
            "order" => self.order = parse_usize(key, v)?,
            "depth" => self.depth = parse_usize(key, v)?,
            "mirror" => {
                if !["auto", "on", "off"].contains(&v) {
                    return Err(Error::Config(format!(
                        "mirror must be auto, on or off, got {v:?}"
                    )));
                }
                self.mirror = v.to_string();
            }
            "beta_min" => self.beta_min = parse_f64(key, v)?,
            "beta_max" => self.beta_max = parse_f64(key, v)?,
            "epochs" => self.epochs = parse_usize(key, v)?,
            "batch" => self.batch = parse_usize(key, v)?,
            "learning_rate" => self.learning_rate = parse_f64(key, v)?,
            "hidden" => self.hidden = parse_usize(key, v)?,
            "emb_width" => self.emb_width = parse_usize(key, v)?,
            "sample_count" => self.sample_count = parse_usize(key, v)?,
            "timepoints" => self.timepoints = parse_usize_list(key, v)?,
            "ks_repeats" => self.ks_repeats = parse_usize(key, v)?,
            "ks_batch" => self.ks_batch = parse_usize(key, v)?,
            "sweep_orders" => self.sweep_orders = parse_usize_list(key, v)?,
            "sweep_bases" => {
                self.sweep_bases = v.split(',').map(|p| p.trim().to_string()).collect()
            }
            "seed" => {
                self.seed =
                    v.parse().map_err(|_| Error::Config(format!("seed: bad integer {v:?}")))?
            }
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parse a plain-text config file: one `key = value` per line, `#`
    /// comments and blank lines ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected key = value, got {raw:?}",
                    lineno + 1
                )));
            };
            cfg.set(key.trim(), value)?;
        }
        Ok(cfg)
    }

    /// Effective log-signature depth.
    pub fn effective_depth(&self) -> usize {
        if self.depth == 0 {
            self.order + 2
        } else {
            self.depth
        }
    }

    /// Mirror flag resolved per dataset: `auto` mirrors sines and fBm
    /// (aperiodic sample paths under Fourier inversion) and leaves
    /// predator-prey and CSV data unmirrored.
    pub fn mirror_flag(&self) -> bool {
        match self.mirror.as_str() {
            "on" => true,
            "off" => false,
            _ => matches!(self.dataset.as_str(), "sines" | "fbm"),
        }
    }

    /// The orthogonal family selected by `basis`, or None for Fourier.
    pub fn family(&self) -> Result<Option<OrthoFamily>> {
        match self.basis.as_str() {
            "fourier" => Ok(None),
            "legendre" => Ok(Some(OrthoFamily::legendre())),
            "chebyshev" => Ok(Some(OrthoFamily::chebyshev())),
            "jacobi" => Ok(Some(OrthoFamily::jacobi(self.jacobi_alpha, self.jacobi_beta)?)),
            "hermite" => Ok(Some(OrthoFamily::new(FamilyKind::HermiteShiftScale {
                center: 0.0,
                epsilon: self.hermite_eps,
            })?)),
            other => Err(Error::Config(format!(
                "unknown basis {other:?} (expected fourier, legendre, chebyshev, jacobi or hermite)"
            ))),
        }
    }

    /// Canonical text form (sorted keys); input to [`Self::hash`].
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let tc = self.csv_time_column.map(|c| c.to_string()).unwrap_or_else(|| "none".into());
        let list = |v: &[usize]| {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        };
        // alphabetical by key
        let _ = write!(
            s,
            "basis={}\nbatch={}\nbeta_max={}\nbeta_min={}\nchannels={}\ncount={}\n\
             csv_channels={}\ncsv_has_header={}\ncsv_path={}\ncsv_stride={}\n\
             csv_time_column={}\ncsv_window={}\ndataset={}\ndepth={}\nemb_width={}\n\
             epochs={}\nfreq_scale={}\nhermite_eps={}\nhidden={}\nhurst={}\n\
             jacobi_alpha={}\njacobi_beta={}\nks_batch={}\nks_repeats={}\n\
             learning_rate={}\nlength={}\nmirror={}\norder={}\nprey_x_max={}\n\
             prey_x_min={}\nprey_y_max={}\nprey_y_min={}\nsample_count={}\nseed={}\n\
             sweep_bases={}\nsweep_orders={}\ntimepoints={}\n",
            self.basis,
            self.batch,
            self.beta_max,
            self.beta_min,
            self.channels,
            self.count,
            list(&self.csv_channels),
            self.csv_has_header,
            self.csv_path,
            self.csv_stride,
            tc,
            self.csv_window,
            self.dataset,
            self.depth,
            self.emb_width,
            self.epochs,
            self.freq_scale,
            self.hermite_eps,
            self.hidden,
            self.hurst,
            self.jacobi_alpha,
            self.jacobi_beta,
            self.ks_batch,
            self.ks_repeats,
            self.learning_rate,
            self.length,
            self.mirror,
            self.order,
            self.prey_x.1,
            self.prey_x.0,
            self.prey_y.1,
            self.prey_y.0,
            self.sample_count,
            self.seed,
            self.sweep_bases.join(","),
            list(&self.sweep_orders),
            list(&self.timepoints),
        );
        s
    }

    pub fn hash(&self) -> String {
        sigflow::rng::sha256_hex(self.canonical().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_parsing_and_overrides() {
        let path = std::env::temp_dir().join("sigflow_cfg_test.cfg");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# comment\ndataset = fbm\nhurst = 0.9\n\nepochs = 10").unwrap();
        drop(f);
        let mut cfg = PipelineConfig::from_file(&path).unwrap();
        assert_eq!(cfg.dataset, "fbm");
        assert_eq!(cfg.hurst, 0.9);
        assert_eq!(cfg.epochs, 10);
        cfg.set("timepoints", "10,20,30").unwrap();
        assert_eq!(cfg.timepoints, vec![10, 20, 30]);
        assert!(cfg.set("nonsense", "1").is_err());
        assert!(cfg.set("mirror", "sometimes").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = PipelineConfig::default();
        let mut b = PipelineConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.set("seed", "99").unwrap();
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn depth_and_mirror_resolution() {
        let mut cfg = PipelineConfig::default();
        assert_eq!(cfg.effective_depth(), 4);
        cfg.depth = 6;
        assert_eq!(cfg.effective_depth(), 6);
        assert!(cfg.mirror_flag()); // sines under auto
        cfg.dataset = "predator-prey".into();
        assert!(!cfg.mirror_flag());
        cfg.mirror = "on".into();
        assert!(cfg.mirror_flag());
    }
}
