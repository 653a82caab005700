//! Lyndon basis of the free Lie algebra and the signature <-> log-signature
//! coordinate maps used as the diffusion embedding.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::tensor::{signature, TruncatedTensor};
use crate::words::{Word, WordPoly};

fn moebius(mut m: u64) -> i64 {
    let mut mu = 1i64;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return 0; // squared factor
            }
            mu = -mu;
        }
        p += 1;
    }
    if m > 1 {
        mu = -mu;
    }
    mu
}

/// Dimension of the step-`n` free Lie algebra over R^d:
/// `sum_{k=1..n} (1/k) sum_{i|k} mu(k/i) d^i`.
pub fn beta_dim(d: usize, n: usize) -> usize {
    assert!(d >= 1 && n >= 1, "beta_dim requires d >= 1 and n >= 1");
    let mut total: i128 = 0;
    for k in 1..=n as u64 {
        let mut s: i128 = 0;
        for i in 1..=k {
            if k % i == 0 {
                s += moebius(k / i) as i128 * (d as i128).pow(i as u32);
            }
        }
        total += s / k as i128; // necklace-counting sums are divisible by k
    }
    total as usize
}

/// Number of Lyndon words of exactly length `k` over `d` letters.
fn lyndon_count_exact(d: usize, k: usize) -> usize {
    let mut s: i128 = 0;
    for i in 1..=k as u64 {
        if k as u64 % i == 0 {
            s += moebius(k as u64 / i) as i128 * (d as i128).pow(i as u32);
        }
    }
    (s / k as i128) as usize
}

/// All Lyndon words of length <= n over {1..d}, ordered by (length, lex).
/// Generated with Duval's algorithm, then reordered.
pub fn lyndon_words(d: usize, n: usize) -> Vec<Word> {
    assert!(d >= 1 && n >= 1);
    let mut out: Vec<Word> = Vec::new();
    let mut w: Vec<u8> = vec![1];
    loop {
        if w.len() <= n {
            out.push(Word::from_letters(&w));
        }
        // extend periodically to length n, then increment
        let m = w.len();
        while w.len() < n {
            let c = w[w.len() - m];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last as usize == d {
                w.pop();
            } else {
                break;
            }
        }
        if w.is_empty() {
            break;
        }
        *w.last_mut().unwrap() += 1;
    }
    out.sort();
    out
}

/// Coordinates of a log-signature in the Lyndon basis of the step-`depth`
/// free Lie algebra, ordered by (length, lex).
#[derive(Debug, Clone, PartialEq)]
pub struct LogSignature {
    pub dim: usize,
    pub depth: usize,
    pub coords: Vec<f64>,
}

impl LogSignature {
    pub fn new(dim: usize, depth: usize, coords: Vec<f64>) -> Result<Self> {
        let want = beta_dim(dim, depth);
        if coords.len() != want {
            return Err(Error::Shape(format!(
                "log-signature over (d={dim}, n={depth}) needs {want} coordinates, got {}",
                coords.len()
            )));
        }
        Ok(Self { dim, depth, coords })
    }
}

/// Lyndon basis data for one (d, n): the ordered words, the tensor-space
/// expansion of each word's standard bracketing, and per-level solvers for
/// projecting Lie elements onto the basis.
pub struct LyndonBasis {
    d: usize,
    n: usize,
    words: Vec<Word>,
    expansions: Vec<WordPoly>,
    level_ranges: Vec<(usize, usize)>, // words index range per length 1..=n
    level_solvers: Vec<Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>>,
}

static BASIS_CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<LyndonBasis>>>> =
    OnceLock::new();

impl LyndonBasis {
    /// Shared, lazily built basis for (d, n).
    pub fn get(d: usize, n: usize) -> Arc<LyndonBasis> {
        let cache = BASIS_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("basis cache poisoned");
        guard.entry((d, n)).or_insert_with(|| Arc::new(LyndonBasis::build(d, n))).clone()
    }

    pub fn build(d: usize, n: usize) -> LyndonBasis {
        let words = lyndon_words(d, n);
        let mut expansions = Vec::with_capacity(words.len());
        let mut memo: HashMap<Word, WordPoly> = HashMap::new();
        for w in &words {
            expansions.push(bracket_expansion(d, w, &mut memo));
        }
        let mut level_ranges = Vec::with_capacity(n);
        let mut start = 0usize;
        for k in 1..=n {
            let count = lyndon_count_exact(d, k);
            level_ranges.push((start, start + count));
            start += count;
        }
        // per level k: square matrix M[r][c] = coefficient of Lyndon word r
        // in the expansion of Lyndon word c; unitriangular, hence invertible
        let mut level_solvers = Vec::with_capacity(n);
        for k in 1..=n {
            let (lo, hi) = level_ranges[k - 1];
            let m = hi - lo;
            if m == 0 {
                level_solvers.push(None);
                continue;
            }
            let mut mat = DMatrix::<f64>::zeros(m, m);
            for c in 0..m {
                let exp = &expansions[lo + c];
                for r in 0..m {
                    mat[(r, c)] = exp.coeff(&words[lo + r]);
                }
            }
            level_solvers.push(Some(mat.lu()));
        }
        LyndonBasis { d, n, words, expansions, level_ranges, level_solvers }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn expansions(&self) -> &[WordPoly] {
        &self.expansions
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    /// Stable identifier of the coordinate system: hash of (d, n, words).
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.d.to_le_bytes());
        h.update(self.n.to_le_bytes());
        for w in &self.words {
            h.update(w.letters());
            h.update([0xff]);
        }
        let digest = h.finalize();
        hex_prefix(&digest, 16)
    }

    /// Lie element `sum_j coords_j * expansion_j` as a dense tensor.
    pub fn expand(&self, coords: &[f64]) -> Result<TruncatedTensor> {
        if coords.len() != self.words.len() {
            return Err(Error::Shape(format!(
                "expected {} coordinates, got {}",
                self.words.len(),
                coords.len()
            )));
        }
        let mut out = TruncatedTensor::zero(self.d, self.n);
        for (j, w) in self.words.iter().enumerate() {
            if coords[j] == 0.0 {
                continue;
            }
            let k = w.len();
            let lvl = out.level_mut(k);
            for (word, c) in self.expansions[j].iter() {
                let mut idx = 0usize;
                for &l in word.letters() {
                    idx = idx * self.d + (l as usize - 1);
                }
                lvl[idx] += coords[j] * c;
            }
        }
        Ok(out)
    }

    /// Lyndon coordinates of a Lie element: per level, solves the
    /// unitriangular system given by the bracketing expansions.
    pub fn project(&self, t: &TruncatedTensor) -> Result<Vec<f64>> {
        if t.dim() != self.d || t.depth() != self.n {
            return Err(Error::Shape(format!(
                "tensor (d={}, n={}) does not match basis (d={}, n={})",
                t.dim(),
                t.depth(),
                self.d,
                self.n
            )));
        }
        let mut coords = vec![0.0; self.words.len()];
        for k in 1..=self.n {
            let (lo, hi) = self.level_ranges[k - 1];
            let m = hi - lo;
            let Some(solver) = &self.level_solvers[k - 1] else {
                continue;
            };
            let mut rhs = DMatrix::<f64>::zeros(m, 1);
            for r in 0..m {
                rhs[(r, 0)] = t.coeff(&self.words[lo + r])?;
            }
            let sol = solver
                .solve(&rhs)
                .ok_or_else(|| Error::Numerical(format!("Lyndon projection at level {k}")))?;
            for r in 0..m {
                coords[lo + r] = sol[(r, 0)];
            }
        }
        Ok(coords)
    }

    /// Max-norm of `expand(project(t)) - t`; zero (to rounding) exactly when
    /// `t` lies in the free Lie algebra.
    pub fn projection_residual(&self, t: &TruncatedTensor) -> Result<f64> {
        let back = self.expand(&self.project(t)?)?;
        let mut worst = 0.0f64;
        for k in 0..=self.n {
            for (a, b) in t.level(k).iter().zip(back.level(k)) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}

fn hex_prefix(bytes: &[u8], n: usize) -> String {
    bytes.iter().take(n).map(|b| format!("{b:02x}")).collect()
}

fn is_lyndon(w: &[u8]) -> bool {
    if w.is_empty() {
        return false;
    }
    let n = w.len();
    for r in 1..n {
        let rotated = w[r..].iter().chain(w[..r].iter());
        if w.iter().ge(rotated) {
            return false;
        }
    }
    true
}

/// Standard factorization w = u.v with v the longest proper Lyndon suffix;
/// the bracketing [b(u), b(v)] expands recursively to a tensor-space poly.
fn bracket_expansion(d: usize, w: &Word, memo: &mut HashMap<Word, WordPoly>) -> WordPoly {
    if let Some(p) = memo.get(w) {
        return p.clone();
    }
    let letters = w.letters();
    let poly = if letters.len() == 1 {
        WordPoly::from_word(d, w.clone()).expect("letter in alphabet")
    } else {
        let mut split = 1;
        for p in 1..letters.len() {
            if is_lyndon(&letters[p..]) {
                split = p;
                break;
            }
        }
        let u = Word::from_letters(&letters[..split]);
        let v = Word::from_letters(&letters[split..]);
        let pu = bracket_expansion(d, &u, memo);
        let pv = bracket_expansion(d, &v, memo);
        let mut out = pu.concat(&pv).expect("same alphabet");
        out.add_scaled(&pv.concat(&pu).expect("same alphabet"), -1.0);
        out
    };
    memo.insert(w.clone(), poly.clone());
    poly
}

/// Step-`n` log-signature of a path in Lyndon coordinates.
pub fn log_signature(path: &SampledPath, n: usize) -> Result<LogSignature> {
    let basis = LyndonBasis::get(path.dim(), n);
    let sig = signature(path, n)?;
    let coords = basis.project(&sig.log()?)?;
    LogSignature::new(path.dim(), n, coords)
}

/// Dense Lie-element tensor of a log-signature.
pub fn lyndon_expand(ls: &LogSignature) -> Result<TruncatedTensor> {
    LyndonBasis::get(ls.dim, ls.depth).expand(&ls.coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn moebius_small_values() {
        let got: Vec<i64> = (1..=12).map(moebius).collect();
        assert_eq!(got, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]);
    }

    #[test]
    fn beta_dim_examples() {
        for n in 1..=8 {
            assert_eq!(beta_dim(1, n), 1);
        }
        assert_eq!(beta_dim(2, 3), 5);
        assert_eq!(beta_dim(2, 1), 2);
        assert_eq!(beta_dim(2, 2), 3);
    }

    #[test]
    fn beta_dim_matches_enumeration() {
        // brute-force rotation test as the independent oracle
        for d in 1..=4usize {
            for n in 1..=6usize {
                let mut count = 0usize;
                let words = lyndon_words(d, n);
                for w in &words {
                    assert!(is_lyndon(w.letters()), "{w} fails the rotation test");
                    count += 1;
                }
                assert_eq!(beta_dim(d, n), count, "d={d}, n={n}");
            }
        }
    }

    #[test]
    fn lyndon_word_listing() {
        let show = |d, n| {
            lyndon_words(d, n).iter().map(|w| w.to_string()).collect::<Vec<_>>()
        };
        assert_eq!(show(2, 2), vec!["1", "2", "1.2"]);
        assert_eq!(show(2, 3), vec!["1", "2", "1.2", "1.1.2", "1.2.2"]);
    }

    #[test]
    fn bracket_of_12_is_commutator() {
        let basis = LyndonBasis::get(2, 2);
        let idx = basis.words().iter().position(|w| w.to_string() == "1.2").unwrap();
        let exp = &basis.expansions()[idx];
        assert_eq!(exp.coeff(&Word::parse("1.2").unwrap()), 1.0);
        assert_eq!(exp.coeff(&Word::parse("2.1").unwrap()), -1.0);
        assert_eq!(exp.len(), 2);

        let mut coords = vec![0.0; basis.size()];
        coords[idx] = 1.0;
        let t = basis.expand(&coords).unwrap();
        assert_eq!(t.coeff(&Word::parse("1.2").unwrap()).unwrap(), 1.0);
        assert_eq!(t.coeff(&Word::parse("2.1").unwrap()).unwrap(), -1.0);
    }

    #[test]
    fn expand_zero_coords() {
        let basis = LyndonBasis::get(3, 3);
        let t = basis.expand(&vec![0.0; basis.size()]).unwrap();
        assert_eq!(t, TruncatedTensor::zero(3, 3));
        assert!(basis.expand(&[1.0]).is_err());
    }

    #[test]
    fn project_expand_roundtrip_on_random_coords() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for &(d, n) in &[(2usize, 4usize), (3, 3), (4, 4)] {
            let basis = LyndonBasis::get(d, n);
            let coords: Vec<f64> =
                (0..basis.size()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let t = basis.expand(&coords).unwrap();
            let back = basis.project(&t).unwrap();
            for (a, b) in coords.iter().zip(back.iter()) {
                assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-12);
            }
            assert!(basis.projection_residual(&t).unwrap() < 1e-10);
        }
    }

    #[test]
    fn log_signature_of_single_segment() {
        let path =
            SampledPath::new(vec![0.0, 1.0], vec![0.0, 0.0, 1.5, -0.5], 2).unwrap();
        let ls = log_signature(&path, 3).unwrap();
        assert_relative_eq!(ls.coords[0], 1.5, epsilon = 1e-12);
        assert_relative_eq!(ls.coords[1], -0.5, epsilon = 1e-12);
        for &c in &ls.coords[2..] {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn log_signature_of_constant_path() {
        let path = SampledPath::new(vec![0.0, 1.0, 2.0], vec![1.0; 6], 2).unwrap();
        let ls = log_signature(&path, 3).unwrap();
        assert!(ls.coords.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn levy_area_is_coordinate_of_word_12() {
        let s3 = 3.0f64.sqrt();
        let path = SampledPath::new(
            vec![0.0, 2.0, 8.0, 9.0],
            vec![0.0, 0.0, 2.0, 2.0 * s3, 8.0, 2.0 * s3, 9.0, 3.0 * s3],
            2,
        )
        .unwrap();
        let ls = log_signature(&path, 2).unwrap();
        let basis = LyndonBasis::get(2, 2);
        let idx = basis.words().iter().position(|w| w.to_string() == "1.2").unwrap();
        assert_relative_eq!(ls.coords[idx], -3.0 * s3, epsilon = 1e-10);
    }

    #[test]
    fn embedding_is_lossless_at_truncation_level() {
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        for &(d, n) in &[(2usize, 4usize), (3, 3)] {
            let times: Vec<f64> = (0..6).map(|i| i as f64).collect();
            let mut values = vec![0.0; 6 * d];
            for v in values.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            let path = SampledPath::new(times, values, d).unwrap();
            let sig = signature(&path, n).unwrap();
            let ls = log_signature(&path, n).unwrap();
            let rebuilt = lyndon_expand(&ls).unwrap().exp().unwrap();
            for k in 0..=n {
                for (a, b) in sig.level(k).iter().zip(rebuilt.level(k)) {
                    assert_relative_eq!(a, b, max_relative = 1e-8, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn any_vector_is_a_valid_log_signature() {
        let basis = LyndonBasis::get(2, 3);
        let coords = vec![1e6, -3.0, 0.0, 42.0, 7.5];
        assert_eq!(coords.len(), basis.size());
        let ls = LogSignature::new(2, 3, coords).unwrap();
        assert!(lyndon_expand(&ls).is_ok());
    }

    #[test]
    fn fingerprint_is_stable_and_distinguishes() {
        let a = LyndonBasis::get(2, 3).fingerprint();
        let b = LyndonBasis::get(2, 3).fingerprint();
        let c = LyndonBasis::get(2, 4).fingerprint();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
