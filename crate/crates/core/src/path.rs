//! Sampled multivariate paths, treated everywhere as piecewise-linear
//! interpolants of their samples.

use crate::error::{Error, Result};

/// A time series sampled at strictly increasing times, interpreted as the
/// piecewise-linear path through its samples.
///
/// Values are stored sample-major: the point at index `i` occupies
/// `values[i*dim .. (i+1)*dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    times: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("path dimension must be at least 1".into()));
        }
        if times.len() < 2 {
            return Err(Error::Input(format!(
                "a path needs at least 2 samples, got {}",
                times.len()
            )));
        }
        if values.len() != times.len() * dim {
            return Err(Error::Input(format!(
                "value count {} does not match {} samples of dimension {}",
                values.len(),
                times.len(),
                dim
            )));
        }
        if !times.iter().all(|t| t.is_finite()) || !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Input("path contains non-finite entries".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("times must be strictly increasing".into()));
        }
        Ok(Self { times, values, dim })
    }

    /// One-dimensional path from parallel time/value vectors.
    pub fn univariate(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(times, values, 1)
    }

    /// Assemble a path from per-channel value vectors sharing one time grid.
    pub fn from_channels(times: Vec<f64>, channels: &[Vec<f64>]) -> Result<Self> {
        let dim = channels.len();
        if dim == 0 {
            return Err(Error::Input("at least one channel required".into()));
        }
        let n = times.len();
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::Input("channel lengths must match the time grid".into()));
        }
        let mut values = Vec::with_capacity(n * dim);
        for i in 0..n {
            for ch in channels {
                values.push(ch[i]);
            }
        }
        Self::new(times, values, dim)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees >= 2 samples
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn value(&self, i: usize, channel: usize) -> f64 {
        self.values[i * self.dim + channel]
    }

    pub fn channel(&self, c: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i, c)).collect()
    }

    /// Extract one channel as a univariate path on the same grid.
    pub fn channel_path(&self, c: usize) -> Result<SampledPath> {
        if c >= self.dim {
            return Err(Error::Input(format!(
                "channel {c} out of range for dimension {}",
                self.dim
            )));
        }
        SampledPath::univariate(self.times.clone(), self.channel(c))
    }

    /// Increment of the path over segment `i` (between samples `i` and `i+1`).
    pub fn increment(&self, i: usize, out: &mut [f64]) {
        let a = self.point(i);
        let b = self.point(i + 1);
        for c in 0..self.dim {
            out[c] = b[c] - a[c];
        }
    }

    pub fn segments(&self) -> usize {
        self.len() - 1
    }

    /// Total variation (sum of Euclidean increment norms).
    pub fn total_variation(&self) -> f64 {
        let mut tv = 0.0;
        for i in 0..self.segments() {
            let a = self.point(i);
            let b = self.point(i + 1);
            let mut s = 0.0;
            for c in 0..self.dim {
                let d = b[c] - a[c];
                s += d * d;
            }
            tv += s.sqrt();
        }
        tv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        assert!(SampledPath::new(vec![0.0], vec![1.0], 1).is_err());
        assert!(SampledPath::new(vec![0.0, 0.0], vec![1.0, 2.0], 1).is_err());
        assert!(SampledPath::new(vec![0.0, 1.0], vec![1.0, 2.0, 3.0], 1).is_err());
        assert!(SampledPath::new(vec![0.0, 1.0], vec![1.0, f64::NAN], 1).is_err());
    }

    #[test]
    fn channel_layout() {
        let p = SampledPath::from_channels(vec![0.0, 1.0], &[vec![1.0, 2.0], vec![3.0, 4.0]])
            .unwrap();
        assert_eq!(p.point(0), &[1.0, 3.0]);
        assert_eq!(p.point(1), &[2.0, 4.0]);
        assert_eq!(p.channel(1), vec![3.0, 4.0]);
        let mut inc = [0.0; 2];
        p.increment(0, &mut inc);
        assert_eq!(inc, [1.0, 1.0]);
    }
}
