//! Synthetic dataset generators (sines, predator-prey, fractional Brownian
//! motion) and windowed CSV ingestion for real data. All generators are
//! pure functions of their parameters and seed.

use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::rng::stream;

/// Random sine curves on a uniform grid over [0, 1]: per channel,
/// `sin(2 pi f u + phi)` with `f ~ U(0, freq_scale)` and
/// `phi ~ U(0, 2 pi)`.
pub fn gen_sines(
    count: usize,
    length: usize,
    channels: usize,
    freq_scale: f64,
    seed: u64,
) -> Vec<SampledPath> {
    assert!(count > 0 && length >= 2 && channels > 0, "positive sizes required");
    let times: Vec<f64> = (0..length).map(|i| i as f64 / (length - 1) as f64).collect();
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, &format!("sines:{i}"));
            let mut chans = Vec::with_capacity(channels);
            for _ in 0..channels {
                let f = rng.gen_range(0.0..1.0) * freq_scale;
                let phi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                chans.push(
                    times
                        .iter()
                        .map(|&u| (2.0 * std::f64::consts::PI * f * u + phi).sin())
                        .collect::<Vec<f64>>(),
                );
            }
            SampledPath::from_channels(times.clone(), &chans).expect("valid grid")
        })
        .collect()
}

/// Initial-condition boxes for the predator-prey system; defaults cover a
/// unit box around the (1, 1) equilibrium.
#[derive(Debug, Clone, Copy)]
pub struct PredatorPreyConfig {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub t_end: f64,
    /// RK4 substeps per output step.
    pub substeps: usize,
}

impl Default for PredatorPreyConfig {
    fn default() -> Self {
        Self { x_range: (0.5, 1.5), y_range: (0.5, 1.5), t_end: 10.0, substeps: 4 }
    }
}

fn lotka_volterra(state: [f64; 2]) -> [f64; 2] {
    let [x, y] = state;
    [(2.0 / 3.0) * x - (2.0 / 3.0) * x * y, x * y - y]
}

fn rk4_step(state: [f64; 2], h: f64) -> [f64; 2] {
    let k1 = lotka_volterra(state);
    let k2 = lotka_volterra([state[0] + 0.5 * h * k1[0], state[1] + 0.5 * h * k1[1]]);
    let k3 = lotka_volterra([state[0] + 0.5 * h * k2[0], state[1] + 0.5 * h * k2[1]]);
    let k4 = lotka_volterra([state[0] + h * k3[0], state[1] + h * k3[1]]);
    [
        state[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        state[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Two-dimensional predator-prey trajectories of
/// `x' = (2/3)x - (2/3)xy`, `y' = xy - y`, integrated with RK4 from
/// randomized positive initial conditions.
pub fn gen_predator_prey(
    count: usize,
    length: usize,
    cfg: PredatorPreyConfig,
    seed: u64,
) -> Vec<SampledPath> {
    assert!(count > 0 && length >= 2, "positive sizes required");
    let times: Vec<f64> =
        (0..length).map(|i| cfg.t_end * i as f64 / (length - 1) as f64).collect();
    let h = cfg.t_end / ((length - 1) * cfg.substeps.max(1)) as f64;
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, &format!("prey:{i}"));
            let mut state = [
                rng.gen_range(cfg.x_range.0..cfg.x_range.1),
                rng.gen_range(cfg.y_range.0..cfg.y_range.1),
            ];
            let mut values = Vec::with_capacity(2 * length);
            values.extend_from_slice(&state);
            for _ in 1..length {
                for _ in 0..cfg.substeps.max(1) {
                    state = rk4_step(state, h);
                }
                values.extend_from_slice(&state);
            }
            SampledPath::new(times.clone(), values, 2).expect("valid grid")
        })
        .collect()
}

/// Exact fractional Brownian motion on a uniform grid over [0, 1] via
/// Cholesky factorization of the covariance
/// `C(s, t) = (s^2H + t^2H - |t - s|^2H) / 2`. Starts at 0; retries the
/// factorization with escalating diagonal jitter if it fails.
pub fn gen_fbm(count: usize, length: usize, hurst: f64, seed: u64) -> Result<Vec<SampledPath>> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Input(format!("Hurst parameter must lie in (0, 1), got {hurst}")));
    }
    assert!(count > 0 && length >= 2, "positive sizes required");
    let times: Vec<f64> = (0..length).map(|i| i as f64 / (length - 1) as f64).collect();
    let m = length - 1; // t = 0 is deterministic
    let h2 = 2.0 * hurst;
    let mut cov = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let (s, t) = (times[i + 1], times[j + 1]);
            cov[(i, j)] = 0.5 * (s.powf(h2) + t.powf(h2) - (t - s).abs().powf(h2));
        }
    }
    let mut factor = None;
    let mut jitter = 0.0;
    for attempt in 0..6 {
        let mut c = cov.clone();
        if attempt > 0 {
            jitter = if attempt == 1 { 1e-12 } else { jitter * 100.0 };
            for i in 0..m {
                c[(i, i)] += jitter;
            }
        }
        if let Some(chol) = c.cholesky() {
            factor = Some(chol);
            break;
        }
    }
    let factor = factor.ok_or_else(|| {
        Error::Numerical("fBM covariance factorization failed even with jitter".into())
    })?;
    let l = factor.l();

    Ok((0..count)
        .map(|i| {
            let mut rng = stream(seed, &format!("fbm:{i}"));
            let z: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let mut values = Vec::with_capacity(length);
            values.push(0.0);
            for r in 0..m {
                let mut acc = 0.0;
                for c in 0..=r {
                    acc += l[(r, c)] * z[c];
                }
                values.push(acc);
            }
            SampledPath::univariate(times.clone(), values).expect("valid grid")
        })
        .collect())
}

/// Windowed CSV ingestion layout.
#[derive(Debug, Clone)]
pub struct CsvLayout {
    /// Window length in rows.
    pub window: usize,
    /// Stride between window starts.
    pub stride: usize,
    /// Value columns to keep (indices after removing the time column).
    pub channels: Vec<usize>,
    /// Optional column holding timestamps; uniform [0, 1] grid otherwise.
    pub time_column: Option<usize>,
    pub has_header: bool,
}

/// Slice a numeric CSV into windows of `layout.window` rows every
/// `layout.stride` rows. Returns the window paths; a file shorter than one
/// window yields an empty set (callers may warn), ragged or non-numeric
/// rows are parse errors naming the row.
pub fn ingest_csv(file: &Path, layout: &CsvLayout) -> Result<Vec<SampledPath>> {
    if layout.window < 2 || layout.stride == 0 || layout.channels.is_empty() {
        return Err(Error::Input(
            "CSV layout needs window >= 2, stride >= 1 and at least one channel".into(),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(layout.has_header)
        .flexible(true)
        .from_path(file)
        .map_err(|e| Error::Input(format!("cannot read CSV {}: {e}", file.display())))?;
    let header_rows = usize::from(layout.has_header);
    let mut width: Option<usize> = None;
    let mut rows: Vec<(Option<f64>, Vec<f64>)> = Vec::new();
    for (ridx, record) in reader.records().enumerate() {
        let row_no = ridx + header_rows + 1; // 1-based, counting the header
        let record = record.map_err(|e| Error::Parse { row: row_no, msg: e.to_string() })?;
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    row: row_no,
                    msg: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        let mut cells = Vec::with_capacity(record.len());
        for cell in record.iter() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: row_no,
                msg: format!("non-numeric cell {cell:?}"),
            })?;
            cells.push(v);
        }
        let time = match layout.time_column {
            Some(tc) => {
                if tc >= cells.len() {
                    return Err(Error::Parse {
                        row: row_no,
                        msg: format!("time column {tc} out of range"),
                    });
                }
                Some(cells.remove(tc))
            }
            None => None,
        };
        for &c in &layout.channels {
            if c >= cells.len() {
                return Err(Error::Parse {
                    row: row_no,
                    msg: format!("channel column {c} out of range"),
                });
            }
        }
        let selected: Vec<f64> = layout.channels.iter().map(|&c| cells[c]).collect();
        rows.push((time, selected));
    }

    if rows.len() < layout.window {
        return Ok(Vec::new());
    }
    let window_count = (rows.len() - layout.window) / layout.stride + 1;
    let mut out = Vec::with_capacity(window_count);
    for w in 0..window_count {
        let start = w * layout.stride;
        let slice = &rows[start..start + layout.window];
        let times: Vec<f64> = match layout.time_column {
            Some(_) => slice.iter().map(|(t, _)| t.expect("time parsed")).collect(),
            None => (0..layout.window)
                .map(|i| i as f64 / (layout.window - 1) as f64)
                .collect(),
        };
        let mut values = Vec::with_capacity(layout.window * layout.channels.len());
        for (_, cells) in slice {
            values.extend_from_slice(cells);
        }
        out.push(SampledPath::new(times, values, layout.channels.len())?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write;

    #[test]
    fn sines_deterministic_and_bounded() {
        let a = gen_sines(8, 50, 2, 1.0, 123);
        let b = gen_sines(8, 50, 2, 1.0, 123);
        assert_eq!(a.len(), 8);
        for (p, q) in a.iter().zip(b.iter()) {
            assert_eq!(p, q);
        }
        for p in &a {
            assert!(p.values().iter().all(|v| (-1.0..=1.0).contains(v)));
        }
        let c = gen_sines(8, 50, 2, 1.0, 124);
        assert_ne!(a[0], c[0]);
    }

    #[test]
    fn sines_marginal_moments_match_arcsine() {
        // at any fixed timepoint, sin with uniform phase has mean 0 and
        // variance 1/2
        let paths = gen_sines(10_000, 8, 1, 1.0, 7);
        for tp in [2usize, 5] {
            let vals: Vec<f64> = paths.iter().map(|p| p.value(tp, 0)).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var =
                vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            assert!(mean.abs() < 0.02, "mean {mean}");
            assert!((var - 0.5).abs() < 0.01, "variance {var}");
        }
    }

    #[test]
    fn predator_prey_equilibrium_and_positivity() {
        // derivatives vanish at (1, 1)
        let d = lotka_volterra([1.0, 1.0]);
        assert_eq!(d, [0.0, 0.0]);
        // trajectory started exactly at the fixed point stays there
        let cfg = PredatorPreyConfig {
            x_range: (1.0 - 1e-15, 1.0 + 1e-15),
            y_range: (1.0 - 1e-15, 1.0 + 1e-15),
            ..Default::default()
        };
        let p = &gen_predator_prey(1, 50, cfg, 5)[0];
        for i in 0..p.len() {
            assert_relative_eq!(p.value(i, 0), 1.0, epsilon = 1e-9);
            assert_relative_eq!(p.value(i, 1), 1.0, epsilon = 1e-9);
        }
        // positivity at desk step sizes
        for p in gen_predator_prey(20, 200, PredatorPreyConfig::default(), 6) {
            assert!(p.values().iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn predator_prey_step_halving_agreement() {
        let mk = |substeps: usize| {
            let cfg = PredatorPreyConfig { substeps, ..Default::default() };
            gen_predator_prey(3, 100, cfg, 9)
        };
        let coarse = mk(4);
        let fine = mk(8);
        for (a, b) in coarse.iter().zip(fine.iter()) {
            let mut worst = 0.0f64;
            for (x, y) in a.values().iter().zip(b.values()) {
                worst = worst.max((x - y).abs());
            }
            assert!(worst < 1e-6, "step halving moved trajectories by {worst}");
        }
    }

    #[test]
    fn predator_prey_conserves_invariant() {
        // V = (x - ln x) + (2/3)(y - ln y) is constant along trajectories
        let cfg = PredatorPreyConfig { substeps: 100, ..Default::default() };
        let p = &gen_predator_prey(1, 101, cfg, 11)[0];
        let v = |x: f64, y: f64| x - x.ln() + (2.0 / 3.0) * (y - y.ln());
        let v0 = v(p.value(0, 0), p.value(0, 1));
        for i in 1..p.len() {
            let vi = v(p.value(i, 0), p.value(i, 1));
            assert!((vi - v0).abs() < 1e-4, "invariant drift {}", (vi - v0).abs());
        }
    }

    #[test]
    fn fbm_brownian_case_has_uncorrelated_increments() {
        let paths = gen_fbm(1000, 33, 0.5, 13).unwrap();
        let mut lag1 = Vec::new();
        for p in &paths {
            let xs = p.channel(0);
            for i in 0..xs.len() - 2 {
                lag1.push((xs[i + 1] - xs[i]) * (xs[i + 2] - xs[i + 1]));
            }
        }
        let n = lag1.len() as f64;
        let mean = lag1.iter().sum::<f64>() / n;
        let sd = (lag1.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        // mean increment product ~ 0 within 3 standard errors
        assert!(mean.abs() < 3.0 * sd / n.sqrt(), "lag-1 correlation {mean}");
    }

    #[test]
    fn fbm_variance_scales_with_hurst() {
        for &h in &[0.3, 0.9] {
            let paths = gen_fbm(2000, 17, h, 17).unwrap();
            for tp in [8usize, 16] {
                let t = paths[0].times()[tp];
                let vals: Vec<f64> = paths.iter().map(|p| p.value(tp, 0)).collect();
                let var = vals.iter().map(|v| v * v).sum::<f64>() / vals.len() as f64;
                let want = t.powf(2.0 * h);
                // chi-square concentration: 3 standard errors
                let se = want * (2.0 / vals.len() as f64).sqrt();
                assert!(
                    (var - want).abs() < 3.0 * se,
                    "H={h} t={t}: var {var} vs {want}"
                );
            }
        }
        assert!(gen_fbm(1, 8, 1.2, 0).is_err());
    }

    #[test]
    fn fbm_deterministic_per_seed() {
        let a = gen_fbm(3, 16, 0.7, 21).unwrap();
        let b = gen_fbm(3, 16, 0.7, 21).unwrap();
        assert_eq!(a, b);
    }

    fn write_temp_csv(name: &str, rows: usize, cols: usize) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "{}", (0..cols).map(|c| format!("c{c}")).collect::<Vec<_>>().join(","))
            .unwrap();
        for r in 0..rows {
            let cells: Vec<String> =
                (0..cols).map(|c| format!("{}", (r * cols + c) as f64 * 0.1)).collect();
            writeln!(f, "{}", cells.join(",")).unwrap();
        }
        path
    }

    #[test]
    fn csv_window_count_matches_slicing_rule() {
        let path = write_temp_csv("sigflow_csv_win.csv", 10_242, 2);
        let layout = CsvLayout {
            window: 1000,
            stride: 200,
            channels: vec![0],
            time_column: None,
            has_header: true,
        };
        let windows = ingest_csv(&path, &layout).unwrap();
        assert_eq!(windows.len(), (10_242 - 1000) / 200 + 1);
        assert_eq!(windows[0].len(), 1000);
        assert_eq!(windows[0].dim(), 1);
    }

    #[test]
    fn csv_short_file_yields_no_windows() {
        let path = write_temp_csv("sigflow_csv_short.csv", 10, 1);
        let layout = CsvLayout {
            window: 100,
            stride: 10,
            channels: vec![0],
            time_column: None,
            has_header: true,
        };
        assert!(ingest_csv(&path, &layout).unwrap().is_empty());
    }

    #[test]
    fn csv_single_column_univariate() {
        let path = write_temp_csv("sigflow_csv_uni.csv", 30, 1);
        let layout = CsvLayout {
            window: 10,
            stride: 10,
            channels: vec![0],
            time_column: None,
            has_header: true,
        };
        let windows = ingest_csv(&path, &layout).unwrap();
        assert_eq!(windows.len(), 3);
        assert!(windows.iter().all(|w| w.dim() == 1));
    }

    #[test]
    fn csv_bad_cells_are_parse_errors_with_row() {
        let path = std::env::temp_dir().join("sigflow_csv_bad.csv");
        std::fs::write(&path, "a,b\n1.0,2.0\n3.0,oops\n").unwrap();
        let layout = CsvLayout {
            window: 2,
            stride: 1,
            channels: vec![0, 1],
            time_column: None,
            has_header: true,
        };
        match ingest_csv(&path, &layout) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
