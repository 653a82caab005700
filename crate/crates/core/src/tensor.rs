//! Truncated free tensor algebra over R^d with signature computation for
//! piecewise-linear paths.
//!
//! An element is stored as dense per-level coefficient blocks: block `k`
//! holds `d^k` entries indexed by words `(i_1..i_k)` row-major with `i_1`
//! most significant. Signatures are grouplike elements (level-0 scalar 1);
//! tensor logarithms are Lie elements (level-0 scalar 0).

use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::words::{PathFunctionalEvaluator, Word, WordPoly};

/// Default cap on the total dense coefficient count a signature may hold.
pub const DEFAULT_COEFF_BUDGET: usize = 1 << 26;

/// Element of the truncated tensor algebra T^n(R^d).
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTensor {
    dim: usize,
    depth: usize,
    levels: Vec<Vec<f64>>,
}

/// Total number of dense coefficients for (dim, depth), if it fits in usize.
pub fn dense_coeff_count(dim: usize, depth: usize) -> Option<usize> {
    let mut total = 0usize;
    let mut level = 1usize;
    for _ in 0..=depth {
        total = total.checked_add(level)?;
        if total > usize::MAX / dim.max(1) {
            // next multiplication would overflow; only fatal if more levels remain
            level = usize::MAX;
        } else {
            level = level.checked_mul(dim)?;
        }
    }
    Some(total)
}

impl TruncatedTensor {
    pub fn zero(dim: usize, depth: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        let levels = (0..=depth).map(|k| vec![0.0; dim.pow(k as u32)]).collect();
        Self { dim, depth, levels }
    }

    /// Unit of the algebra: (1, 0, ..., 0).
    pub fn unit(dim: usize, depth: usize) -> Self {
        let mut t = Self::zero(dim, depth);
        t.levels[0][0] = 1.0;
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.levels[k]
    }

    pub fn scalar(&self) -> f64 {
        self.levels[0][0]
    }

    /// Row-major index of a word inside its level block.
    pub fn word_index(&self, word: &Word) -> Result<usize> {
        let mut idx = 0usize;
        for &l in word.letters() {
            if l == 0 || l as usize > self.dim {
                return Err(Error::Input(format!(
                    "letter {l} outside alphabet 1..={}",
                    self.dim
                )));
            }
            idx = idx * self.dim + (l as usize - 1);
        }
        Ok(idx)
    }

    /// Coefficient `<word, self>`.
    pub fn coeff(&self, word: &Word) -> Result<f64> {
        if word.len() > self.depth {
            return Err(Error::Shape(format!(
                "word length {} exceeds depth {}",
                word.len(),
                self.depth
            )));
        }
        Ok(self.levels[word.len()][self.word_index(word)?])
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.levels.iter_mut().zip(other.levels.iter()) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += *y;
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        for lvl in &mut self.levels {
            for x in lvl.iter_mut() {
                *x *= c;
            }
        }
    }

    /// Largest absolute coefficient at level `k`.
    pub fn level_max_abs(&self, k: usize) -> f64 {
        self.levels[k].iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.depth != other.depth {
            return Err(Error::Shape(format!(
                "operands have (dim, depth) = ({}, {}) vs ({}, {})",
                self.dim, self.depth, other.dim, other.depth
            )));
        }
        Ok(())
    }

    /// Truncated tensor product: level k of the result is
    /// `sum_{i=0..k} A_i (x) B_{k-i}`; terms above the depth are dropped.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let d = self.dim;
        let mut out = Self::zero(d, self.depth);
        for k in 0..=self.depth {
            let ck = &mut out.levels[k];
            for i in 0..=k {
                let a = &self.levels[i];
                let b = &other.levels[k - i];
                let bl = b.len();
                for (ai, &av) in a.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    let base = ai * bl;
                    for (bi, &bv) in b.iter().enumerate() {
                        ck[base + bi] += av * bv;
                    }
                }
            }
        }
        Ok(out)
    }

    /// In-place right multiplication by the tensor exponential of a level-1
    /// increment: `self <- self * exp(v)`. This is the hot path of the
    /// signature algorithm; `exp(v)` has the closed form `v^(x)k / k!`.
    pub fn mul_exp_increment(&mut self, v: &[f64]) {
        debug_assert_eq!(v.len(), self.dim);
        let d = self.dim;
        let n = self.depth;
        // powers[j] = v^(x)j / j!
        let mut powers: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        powers.push(vec![1.0]);
        for j in 1..=n {
            let prev = &powers[j - 1];
            let mut next = vec![0.0; prev.len() * d];
            let inv = 1.0 / j as f64;
            for (pi, &pv) in prev.iter().enumerate() {
                let base = pi * d;
                for c in 0..d {
                    next[base + c] = pv * v[c] * inv;
                }
            }
            powers.push(next);
        }
        // descending k so lower levels still hold their old values
        for k in (1..=n).rev() {
            // split_at_mut to read old levels < k while writing level k
            let (lower, upper) = self.levels.split_at_mut(k);
            let ck = &mut upper[0];
            for i in 0..k {
                let a = &lower[i];
                let p = &powers[k - i];
                let pl = p.len();
                for (ai, &av) in a.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    let base = ai * pl;
                    for (pi, &pv) in p.iter().enumerate() {
                        ck[base + pi] += av * pv;
                    }
                }
            }
        }
    }

    /// Tensor exponential of a Lie-side element (level-0 scalar must be 0).
    pub fn exp(&self) -> Result<Self> {
        if self.scalar() != 0.0 {
            return Err(Error::Domain(format!(
                "tensor exponential requires level-0 scalar 0, got {}",
                self.scalar()
            )));
        }
        // closed form for a pure level-1 element
        if (2..=self.depth).all(|k| self.levels[k].iter().all(|&x| x == 0.0)) {
            let mut out = Self::unit(self.dim, self.depth);
            out.mul_exp_increment(&self.levels.get(1).map(|l| l.clone()).unwrap_or_default());
            return Ok(out);
        }
        let mut out = Self::unit(self.dim, self.depth);
        let mut term = Self::unit(self.dim, self.depth);
        for k in 1..=self.depth {
            term = term.product(self)?;
            term.scale(1.0 / k as f64);
            out.add_assign(&term);
        }
        Ok(out)
    }

    /// Tensor logarithm of a group-side element (level-0 scalar must be 1).
    pub fn log(&self) -> Result<Self> {
        if self.scalar() != 1.0 {
            return Err(Error::Domain(format!(
                "tensor logarithm requires level-0 scalar 1, got {}",
                self.scalar()
            )));
        }
        let mut a = self.clone(); // A - 1
        a.levels[0][0] = 0.0;
        let mut out = Self::zero(self.dim, self.depth);
        let mut term = Self::unit(self.dim, self.depth);
        for k in 1..=self.depth {
            term = term.product(&a)?;
            let mut contrib = term.clone();
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            contrib.scale(sign / k as f64);
            out.add_assign(&contrib);
        }
        Ok(out)
    }
}

/// Truncated tensor product of two compatible elements.
pub fn tensor_product(a: &TruncatedTensor, b: &TruncatedTensor) -> Result<TruncatedTensor> {
    a.product(b)
}

/// Tensor exponential (see [`TruncatedTensor::exp`]).
pub fn tensor_exp(l: &TruncatedTensor) -> Result<TruncatedTensor> {
    l.exp()
}

/// Tensor logarithm (see [`TruncatedTensor::log`]).
pub fn tensor_log(a: &TruncatedTensor) -> Result<TruncatedTensor> {
    a.log()
}

/// Step-`depth` signature of a piecewise-linear path: the ordered product of
/// tensor exponentials of the segment increments (Chen's relation).
///
/// Refuses (dim, depth) combinations whose dense coefficient count exceeds
/// [`DEFAULT_COEFF_BUDGET`]; see [`signature_with_budget`].
pub fn signature(path: &SampledPath, depth: usize) -> Result<TruncatedTensor> {
    signature_with_budget(path, depth, DEFAULT_COEFF_BUDGET)
}

/// Signature with an explicit dense-coefficient budget.
pub fn signature_with_budget(
    path: &SampledPath,
    depth: usize,
    budget: usize,
) -> Result<TruncatedTensor> {
    if depth == 0 {
        return Err(Error::Input("signature depth must be at least 1".into()));
    }
    let needed = dense_coeff_count(path.dim(), depth)
        .ok_or_else(|| Error::Budget { needed: usize::MAX, budget })?;
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    let mut sig = TruncatedTensor::unit(path.dim(), depth);
    let mut inc = vec![0.0; path.dim()];
    for s in 0..path.segments() {
        path.increment(s, &mut inc);
        sig.mul_exp_increment(&inc);
    }
    Ok(sig)
}

/// Single signature coefficient `<word, S(path)>` evaluated without
/// materializing dense tensor blocks, via a dynamic program over
/// (segment, word-prefix) states.
pub fn word_coefficient(path: &SampledPath, word: &Word) -> Result<f64> {
    let poly = WordPoly::from_word(path.dim(), word.clone())?;
    let mut ev = PathFunctionalEvaluator::new(&[&poly], path.dim())?;
    ev.push_path(path)?;
    Ok(ev.value(0))
}
