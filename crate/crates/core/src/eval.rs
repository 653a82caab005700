//! Statistical and reconstruction metrics: two-sample Kolmogorov-Smirnov,
//! the marginal KS protocol over random batches, trapezoid L2 errors, and
//! approximation-order sweeps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversion::{invert_fourier, invert_ortho, reconstruct, BasisCoeffs, OrthoFamily};
use crate::path::SampledPath;
use crate::rng::stream;

/// Asymptotic two-sample critical coefficient at the 5% level.
const KS_C05: f64 = 1.358;

/// Two-sample Kolmogorov-Smirnov statistic (sup distance between empirical
/// CDFs) and rejection at the 5% level via the asymptotic critical value
/// `c(0.05) sqrt((m+n)/(m n))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, bool)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Input("KS test requires nonempty samples".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|p, q| p.partial_cmp(q).expect("finite sample"));
    ys.sort_unstable_by(|p, q| p.partial_cmp(q).expect("finite sample"));
    let (m, n) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < m && j < n {
        let t = xs[i].min(ys[j]);
        while i < m && xs[i] <= t {
            i += 1;
        }
        while j < n && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    let crit = KS_C05 * (((m + n) as f64) / ((m * n) as f64)).sqrt();
    Ok((d, d > crit))
}

/// Marginal KS results per timepoint and overall.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KSReport {
    pub mean_ks: f64,
    pub type1_rate: f64,
    pub repeats: usize,
    pub batch: usize,
    pub per_timepoint: Vec<TimepointKS>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimepointKS {
    pub index: usize,
    pub mean_ks: f64,
    pub reject_rate: f64,
}

impl KSReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("timepoint,mean_ks,reject_rate\n");
        for tp in &self.per_timepoint {
            out.push_str(&format!("{},{},{}\n", tp.index, tp.mean_ks, tp.reject_rate));
        }
        out.push_str(&format!("overall,{},{}\n", self.mean_ks, self.type1_rate));
        out
    }
}

/// Marginal KS protocol: per timepoint, repeatedly draw batch-size subsets
/// (with replacement) of the marginal values from each side, run the
/// two-sample test, and average the statistic and the rejection indicator.
/// Multichannel paths contribute one test per channel per repeat.
pub fn ks_marginal_protocol(
    real: &[SampledPath],
    generated: &[SampledPath],
    timepoints: &[usize],
    repeats: usize,
    batch: usize,
    seed: u64,
) -> Result<KSReport> {
    if real.is_empty() || generated.is_empty() {
        return Err(Error::Input("KS protocol requires nonempty path sets".into()));
    }
    if timepoints.is_empty() || repeats == 0 || batch == 0 {
        return Err(Error::Input("KS protocol requires timepoints, repeats and batch".into()));
    }
    let channels = real[0].dim();
    if generated[0].dim() != channels {
        return Err(Error::Input("real and generated channel counts differ".into()));
    }
    let min_len = real
        .iter()
        .chain(generated.iter())
        .map(|p| p.len())
        .min()
        .expect("nonempty");
    if let Some(&tp) = timepoints.iter().find(|&&tp| tp >= min_len) {
        return Err(Error::Input(format!(
            "timepoint {tp} out of range for paths of length {min_len}"
        )));
    }

    let mut per_timepoint = Vec::with_capacity(timepoints.len());
    let mut total_ks = 0.0;
    let mut total_rej = 0.0;
    for &tp in timepoints {
        let mut rng = stream(seed, &format!("ks-protocol:{tp}"));
        let mut ks_acc = 0.0;
        let mut rej_acc = 0.0;
        let mut xs = vec![0.0; batch];
        let mut ys = vec![0.0; batch];
        for _ in 0..repeats {
            for c in 0..channels {
                for slot in xs.iter_mut() {
                    let p = rng.gen_range(0..real.len());
                    *slot = real[p].value(tp, c);
                }
                for slot in ys.iter_mut() {
                    let p = rng.gen_range(0..generated.len());
                    *slot = generated[p].value(tp, c);
                }
                let (d, rej) = ks_two_sample(&xs, &ys)?;
                ks_acc += d;
                rej_acc += if rej { 1.0 } else { 0.0 };
            }
        }
        let denom = (repeats * channels) as f64;
        let tp_ks = ks_acc / denom;
        let tp_rej = rej_acc / denom;
        total_ks += tp_ks;
        total_rej += tp_rej;
        per_timepoint.push(TimepointKS { index: tp, mean_ks: tp_ks, reject_rate: tp_rej });
    }
    Ok(KSReport {
        mean_ks: total_ks / timepoints.len() as f64,
        type1_rate: total_rej / timepoints.len() as f64,
        repeats,
        batch,
        per_timepoint,
    })
}

/// Root of the trapezoid-weighted mean squared difference between two paths
/// on the same grid.
pub fn l2_error(x: &SampledPath, y: &SampledPath) -> Result<f64> {
    if x.dim() != y.dim() || x.len() != y.len() {
        return Err(Error::Input("paths must share dimension and grid".into()));
    }
    let same_grid = x
        .times()
        .iter()
        .zip(y.times())
        .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !same_grid {
        return Err(Error::Input("paths must share the time grid".into()));
    }
    let ts = x.times();
    let span = ts[ts.len() - 1] - ts[0];
    let mut acc = 0.0;
    for i in 0..ts.len() - 1 {
        let h = ts[i + 1] - ts[i];
        let (mut d0, mut d1) = (0.0, 0.0);
        for c in 0..x.dim() {
            let a = x.value(i, c) - y.value(i, c);
            let b = x.value(i + 1, c) - y.value(i + 1, c);
            d0 += a * a;
            d1 += b * b;
        }
        acc += 0.5 * h * (d0 + d1);
    }
    Ok((acc / span).sqrt())
}

/// One basis choice in an approximation sweep.
#[derive(Debug, Clone)]
pub enum SweepBasis {
    Fourier { mirror: bool },
    Ortho(OrthoFamily),
}

impl SweepBasis {
    pub fn label(&self) -> String {
        match self {
            SweepBasis::Fourier { mirror } => {
                if *mirror {
                    "fourier(mirror)".into()
                } else {
                    "fourier".into()
                }
            }
            SweepBasis::Ortho(f) => f.label(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub basis: String,
    pub order: usize,
    pub mean_l2: f64,
}

/// Invert and reconstruct every path at every (basis, order) pair and
/// average the L2 reconstruction error. Mirrors the error-vs-order figure
/// tables; emit with [`sweep_to_csv`].
pub fn approximation_sweep(
    paths: &[SampledPath],
    bases: &[SweepBasis],
    orders: &[usize],
) -> Result<Vec<SweepRow>> {
    if paths.is_empty() || bases.is_empty() || orders.is_empty() {
        return Err(Error::Input("sweep requires paths, bases and orders".into()));
    }
    let mut rows = Vec::with_capacity(bases.len() * orders.len());
    for basis in bases {
        for &order in orders {
            let mut acc = 0.0;
            for p in paths {
                let coeffs = match basis {
                    SweepBasis::Fourier { mirror } => {
                        BasisCoeffs::Fourier(invert_fourier(p, order, *mirror)?)
                    }
                    SweepBasis::Ortho(f) => BasisCoeffs::Ortho(invert_ortho(p, f, order)?),
                };
                let rec = reconstruct(&coeffs, p.times())?;
                acc += l2_error(p, &rec)?;
            }
            rows.push(SweepRow {
                basis: basis.label(),
                order,
                mean_l2: acc / paths.len() as f64,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("basis,order,mean_l2\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.basis, r.order, r.mean_l2));
    }
    out
}
