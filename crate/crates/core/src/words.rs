//! Words, linear combinations of words, shuffle and right half-shuffle
//! products, and dual pairing against tensors and paths.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::tensor::TruncatedTensor;

/// An index sequence over the alphabet {1..d}; the empty sequence is the
/// empty word. Ordering is canonical: by length, then lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Self {
        Word(letters.to_vec())
    }

    pub fn letter(l: u8) -> Self {
        Word(vec![l])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    /// Concatenation with another word.
    pub fn concat(&self, other: &Word) -> Word {
        let mut l = self.0.clone();
        l.extend_from_slice(&other.0);
        Word(l)
    }

    pub fn append(&self, letter: u8) -> Word {
        let mut l = self.0.clone();
        l.push(letter);
        Word(l)
    }

    /// Parse the canonical text form, e.g. "1.2.1"; "e" and "" denote the
    /// empty word.
    pub fn parse(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::empty());
        }
        let letters = s
            .split('.')
            .map(|p| {
                p.trim()
                    .parse::<u8>()
                    .map_err(|_| Error::Input(format!("bad word letter {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        if letters.iter().any(|&l| l == 0) {
            return Err(Error::Input(format!("word letters must be >= 1 in {s:?}")));
        }
        Ok(Word(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Finite linear combination of words over one alphabet. Zero coefficients
/// are never retained; iteration order is canonical (length, then lex).
#[derive(Debug, Clone, PartialEq)]
pub struct WordPoly {
    dim: usize,
    terms: BTreeMap<Word, f64>,
}

impl WordPoly {
    pub fn zero(dim: usize) -> Self {
        WordPoly { dim, terms: BTreeMap::new() }
    }

    pub fn from_word(dim: usize, word: Word) -> Result<Self> {
        check_alphabet(&word, dim)?;
        let mut terms = BTreeMap::new();
        terms.insert(word, 1.0);
        Ok(WordPoly { dim, terms })
    }

    /// The empty word with coefficient 1 (unit of the shuffle algebra).
    pub fn one(dim: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Word::empty(), 1.0);
        WordPoly { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> f64 {
        self.terms.get(w).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    /// Longest word length present (0 for the zero polynomial).
    pub fn max_len(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, w: Word, c: f64) {
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &WordPoly, c: f64) {
        for (w, v) in other.iter() {
            self.add_term(w.clone(), c * v);
        }
    }

    pub fn scale(&mut self, c: f64) {
        if c == 0.0 {
            self.terms.clear();
            return;
        }
        for v in self.terms.values_mut() {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: f64) -> WordPoly {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// Bilinear concatenation product.
    pub fn concat(&self, other: &WordPoly) -> Result<WordPoly> {
        check_dims(self, other)?;
        let mut out = WordPoly::zero(self.dim);
        for (u, cu) in self.iter() {
            for (v, cv) in other.iter() {
                out.add_term(u.concat(v), cu * cv);
            }
        }
        Ok(out)
    }

    /// Total coefficient mass (sum of coefficients).
    pub fn coeff_sum(&self) -> f64 {
        self.terms.values().sum()
    }

    /// Canonical text form, e.g. "0.5*1.2 + 1*2.1".
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.iter()
            .map(|(w, c)| format!("{c}*{w}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn check_alphabet(w: &Word, dim: usize) -> Result<()> {
    if let Some(&l) = w.letters().iter().find(|&&l| l == 0 || l as usize > dim) {
        return Err(Error::Input(format!("letter {l} outside alphabet 1..={dim}")));
    }
    Ok(())
}

fn check_dims(a: &WordPoly, b: &WordPoly) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::Shape(format!(
            "word polynomials over different alphabets ({} vs {})",
            a.dim, b.dim
        )));
    }
    Ok(())
}

fn shuffle_words(u: &[u8], v: &[u8], coeff: f64, out: &mut WordPoly) {
    if u.is_empty() {
        out.add_term(Word::from_letters(v), coeff);
        return;
    }
    if v.is_empty() {
        out.add_term(Word::from_letters(u), coeff);
        return;
    }
    // recurse on the last letter: u (sh) v = (u' (sh) v).u_last + (u (sh) v').v_last
    let mut stack: Vec<(usize, usize, Vec<u8>)> = vec![(u.len(), v.len(), Vec::new())];
    while let Some((ul, vl, tail)) = stack.pop() {
        if ul == 0 || vl == 0 {
            let mut word = Vec::with_capacity(ul + vl + tail.len());
            word.extend_from_slice(&u[..ul]);
            word.extend_from_slice(&v[..vl]);
            word.extend(tail.iter().rev());
            out.add_term(Word(word), coeff);
            continue;
        }
        let mut t1 = tail.clone();
        t1.push(u[ul - 1]);
        stack.push((ul - 1, vl, t1));
        let mut t2 = tail;
        t2.push(v[vl - 1]);
        stack.push((ul, vl - 1, t2));
    }
}

/// Shuffle product: bilinear extension of the sum over all interleavings.
pub fn shuffle(u: &WordPoly, v: &WordPoly) -> Result<WordPoly> {
    check_dims(u, v)?;
    let mut out = WordPoly::zero(u.dim);
    for (uw, uc) in u.iter() {
        for (vw, vc) in v.iter() {
            shuffle_words(uw.letters(), vw.letters(), uc * vc, &mut out);
        }
    }
    Ok(out)
}

/// `base` shuffled with itself `power` times (`power = 0` gives the unit).
pub fn shuffle_power(base: &WordPoly, power: usize) -> Result<WordPoly> {
    let mut out = WordPoly::one(base.dim);
    for _ in 0..power {
        out = shuffle(&out, base)?;
    }
    Ok(out)
}

fn half_shuffle_words(u: &[u8], v: &[u8], coeff: f64, out: &mut WordPoly) {
    debug_assert!(!v.is_empty());
    let (rest, last) = v.split_at(v.len() - 1);
    if rest.is_empty() {
        let mut word = Vec::with_capacity(u.len() + 1);
        word.extend_from_slice(u);
        word.push(last[0]);
        out.add_term(Word(word), coeff);
        return;
    }
    // u > (w.j) = (u > w + w > u).j: shuffle u with rest, then append j
    let mut inner = WordPoly::zero(out.dim);
    shuffle_words(u, rest, coeff, &mut inner);
    for (w, c) in inner.iter() {
        out.add_term(w.append(last[0]), c);
    }
}

/// Right half-shuffle product. The right operand must contain no empty-word
/// term; `u > v` keeps the last letter of `v` last, so that pairing against
/// a signature realizes the iterated Stieltjes integral of `u` against `v`.
pub fn half_shuffle_right(u: &WordPoly, v: &WordPoly) -> Result<WordPoly> {
    check_dims(u, v)?;
    if v.coeff(&Word::empty()) != 0.0 {
        return Err(Error::Domain(
            "right operand of the half-shuffle must not contain the empty word".into(),
        ));
    }
    let mut out = WordPoly::zero(u.dim);
    for (uw, uc) in u.iter() {
        for (vw, vc) in v.iter() {
            half_shuffle_words(uw.letters(), vw.letters(), uc * vc, &mut out);
        }
    }
    Ok(out)
}

/// Dual pairing `sum_w f(w) <w, A>`.
pub fn pair(f: &WordPoly, a: &TruncatedTensor) -> Result<f64> {
    if f.dim() != a.dim() {
        return Err(Error::Shape(format!(
            "alphabet size {} does not match tensor dimension {}",
            f.dim(),
            a.dim()
        )));
    }
    if f.max_len() > a.depth() {
        return Err(Error::Shape(format!(
            "functional has words of length {} but tensor depth is {}",
            f.max_len(),
            a.depth()
        )));
    }
    let mut acc = 0.0;
    for (w, c) in f.iter() {
        acc += c * a.coeff(w)?;
    }
    Ok(acc)
}

/// Evaluates `<f, S(path)>` with signature coefficients fetched on demand;
/// usable when the dense signature would exceed the memory budget.
pub fn pair_on_path(f: &WordPoly, path: &SampledPath) -> Result<f64> {
    let mut ev = PathFunctionalEvaluator::new(&[f], path.dim())?;
    ev.push_path(path)?;
    Ok(ev.value(0))
}

/// Streaming evaluator for several word polynomials against one path.
///
/// All words are merged into a prefix trie; feeding a segment increment
/// updates every node value `c[w] = <w, S(path so far)>` exactly (the
/// update is the truncated convolution with the segment's tensor
/// exponential). Values after each segment are the prefix-path pairings,
/// which makes the evaluator double as `t -> <f, S(x|[0,t])>`.
pub struct PathFunctionalEvaluator {
    dim: usize,
    parent: Vec<u32>,
    letter: Vec<u8>,
    order_desc: Vec<u32>, // non-root nodes ordered by depth descending
    max_depth: usize,
    polys: Vec<Vec<(u32, f64)>>,
    values: Vec<f64>,
    scratch: Vec<f64>,
}

impl PathFunctionalEvaluator {
    pub fn new(polys: &[&WordPoly], dim: usize) -> Result<Self> {
        let mut parent: Vec<u32> = vec![0];
        let mut letter: Vec<u8> = vec![0];
        let mut depth: Vec<u8> = vec![0];
        let mut children: Vec<BTreeMap<u8, u32>> = vec![BTreeMap::new()];
        let mut compiled = Vec::with_capacity(polys.len());
        for poly in polys {
            if poly.dim() != dim {
                return Err(Error::Shape(format!(
                    "functional alphabet {} does not match path dimension {dim}",
                    poly.dim()
                )));
            }
            let mut terms = Vec::with_capacity(poly.len());
            for (w, c) in poly.iter() {
                check_alphabet(w, dim)?;
                let mut node = 0u32;
                for &l in w.letters() {
                    node = match children[node as usize].get(&l) {
                        Some(&n) => n,
                        None => {
                            let n = parent.len() as u32;
                            parent.push(node);
                            letter.push(l);
                            depth.push(depth[node as usize] + 1);
                            children.push(BTreeMap::new());
                            children[node as usize].insert(l, n);
                            n
                        }
                    };
                }
                terms.push((node, c));
            }
            compiled.push(terms);
        }
        let mut order_desc: Vec<u32> = (1..parent.len() as u32).collect();
        order_desc.sort_by(|&a, &b| depth[b as usize].cmp(&depth[a as usize]));
        let max_depth = depth.iter().copied().max().unwrap_or(0) as usize;
        let n = parent.len();
        let mut ev = PathFunctionalEvaluator {
            dim,
            parent,
            letter,
            order_desc,
            max_depth,
            polys: compiled,
            values: vec![0.0; n],
            scratch: vec![0.0; n],
        };
        ev.reset();
        Ok(ev)
    }

    /// Forget all pushed segments (`<empty, S>` = 1, all other prefixes 0).
    pub fn reset(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
        self.values[0] = 1.0;
    }

    /// Extend the path by one linear segment with increment `delta`.
    pub fn push_segment(&mut self, delta: &[f64]) {
        debug_assert_eq!(delta.len(), self.dim);
        // values <- sum_j values (x) delta^(x)j / j!, realized as repeated
        // one-letter extensions: t_j[w.l] = t_{j-1}[w] * delta_l / j.
        self.scratch.copy_from_slice(&self.values);
        for j in 1..=self.max_depth {
            let inv = 1.0 / j as f64;
            // descending depth: each node reads its parent's pass-(j-1) value
            for &node in &self.order_desc {
                let node = node as usize;
                let p = self.parent[node] as usize;
                self.scratch[node] =
                    self.scratch[p] * delta[self.letter[node] as usize - 1] * inv;
            }
            self.scratch[0] = 0.0;
            for (v, t) in self.values.iter_mut().zip(self.scratch.iter()) {
                *v += *t;
            }
        }
    }

    /// Push every segment of a path.
    pub fn push_path(&mut self, path: &SampledPath) -> Result<()> {
        if path.dim() != self.dim {
            return Err(Error::Shape(format!(
                "path dimension {} does not match evaluator alphabet {}",
                path.dim(),
                self.dim
            )));
        }
        let mut inc = vec![0.0; self.dim];
        for s in 0..path.segments() {
            path.increment(s, &mut inc);
            self.push_segment(&inc);
        }
        Ok(())
    }

    /// Current value of functional `i` against the path pushed so far.
    pub fn value(&self, i: usize) -> f64 {
        self.polys[i].iter().map(|&(node, c)| c * self.values[node as usize]).sum()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.polys.len()).map(|i| self.value(i)).collect()
    }
}

/// Evaluate several functionals against a path in one pass.
pub fn evaluate_on_path(polys: &[&WordPoly], path: &SampledPath) -> Result<Vec<f64>> {
    let mut ev = PathFunctionalEvaluator::new(polys, path.dim())?;
    ev.push_path(path)?;
    Ok(ev.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::signature;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn wp(dim: usize, s: &str) -> WordPoly {
        WordPoly::from_word(dim, Word::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn word_ordering_is_length_then_lex() {
        let mut ws = vec![
            Word::parse("2").unwrap(),
            Word::parse("1.2").unwrap(),
            Word::parse("1").unwrap(),
            Word::empty(),
            Word::parse("1.1.2").unwrap(),
            Word::parse("1.1").unwrap(),
        ];
        ws.sort();
        let shown: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
        assert_eq!(shown, vec!["e", "1", "2", "1.1", "1.2", "1.1.2"]);
    }

    #[test]
    fn shuffle_basic_examples() {
        let d = 2;
        let s = shuffle(&wp(d, "1"), &wp(d, "2")).unwrap();
        assert_eq!(s.coeff(&Word::parse("1.2").unwrap()), 1.0);
        assert_eq!(s.coeff(&Word::parse("2.1").unwrap()), 1.0);
        assert_eq!(s.len(), 2);

        let s = shuffle(&wp(d, "1"), &wp(d, "1")).unwrap();
        assert_eq!(s.coeff(&Word::parse("1.1").unwrap()), 2.0);
        assert_eq!(s.len(), 1);

        let u = wp(d, "1.2");
        let s = shuffle(&WordPoly::one(d), &u).unwrap();
        assert_eq!(s, u);
    }

    #[test]
    fn shuffle_mass_is_binomial() {
        let d = 3;
        let s = shuffle(&wp(d, "1.2"), &wp(d, "3.3.3")).unwrap();
        // C(5, 2) = 10 interleavings in total mass
        assert_relative_eq!(s.coeff_sum(), 10.0);
    }

    #[test]
    fn shuffle_commutative_associative() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let d = rng.gen_range(2..=4usize);
            let rand_poly = |rng: &mut ChaCha12Rng| {
                let mut p = WordPoly::zero(d);
                for _ in 0..rng.gen_range(1..=3) {
                    let len = rng.gen_range(0..=3usize);
                    let letters: Vec<u8> =
                        (0..len).map(|_| rng.gen_range(1..=d as u8)).collect();
                    // integer coefficients keep f64 arithmetic exact here
                    p.add_term(Word::from_letters(&letters), rng.gen_range(-3..=3) as f64);
                }
                p
            };
            let (a, b, c) =
                (rand_poly(&mut rng), rand_poly(&mut rng), rand_poly(&mut rng));
            assert_eq!(shuffle(&a, &b).unwrap(), shuffle(&b, &a).unwrap());
            let ab_c = shuffle(&shuffle(&a, &b).unwrap(), &c).unwrap();
            let a_bc = shuffle(&a, &shuffle(&b, &c).unwrap()).unwrap();
            assert_eq!(ab_c, a_bc);
        }
    }

    #[test]
    fn half_shuffle_base_case_appends() {
        let d = 2;
        let s = half_shuffle_right(&wp(d, "1"), &wp(d, "2")).unwrap();
        assert_eq!(s, wp(d, "1.2"));
    }

    #[test]
    fn half_shuffle_sums_to_shuffle() {
        let d = 4;
        let u = wp(d, "1.2");
        let v = wp(d, "3.4");
        let mut lhs = half_shuffle_right(&u, &v).unwrap();
        lhs.add_scaled(&half_shuffle_right(&v, &u).unwrap(), 1.0);
        assert_eq!(lhs, shuffle(&u, &v).unwrap());
    }

    #[test]
    fn half_shuffle_rejects_empty_right() {
        let d = 2;
        assert!(half_shuffle_right(&wp(d, "1"), &WordPoly::one(d)).is_err());
    }

    // independent oracle: direct recursion on word pairs without the
    // iterative shuffle underneath
    fn half_shuffle_oracle(u: &[u8], v: &[u8]) -> Vec<(Vec<u8>, f64)> {
        fn shuffle_oracle(u: &[u8], v: &[u8]) -> Vec<(Vec<u8>, f64)> {
            if u.is_empty() {
                return vec![(v.to_vec(), 1.0)];
            }
            if v.is_empty() {
                return vec![(u.to_vec(), 1.0)];
            }
            let mut out = Vec::new();
            for (mut w, c) in shuffle_oracle(&u[..u.len() - 1], v) {
                w.push(u[u.len() - 1]);
                out.push((w, c));
            }
            for (mut w, c) in shuffle_oracle(u, &v[..v.len() - 1]) {
                w.push(v[v.len() - 1]);
                out.push((w, c));
            }
            out
        }
        if v.len() == 1 {
            let mut w = u.to_vec();
            w.push(v[0]);
            return vec![(w, 1.0)];
        }
        let mut out = Vec::new();
        for (mut w, c) in shuffle_oracle(u, &v[..v.len() - 1]) {
            w.push(v[v.len() - 1]);
            out.push((w, c));
        }
        out
    }

    #[test]
    fn half_shuffle_matches_recursive_oracle() {
        let d = 4;
        let got = half_shuffle_right(&wp(d, "1.2"), &wp(d, "3.4")).unwrap();
        let mut want = WordPoly::zero(d);
        for (w, c) in half_shuffle_oracle(&[1, 2], &[3, 4]) {
            want.add_term(Word::from_letters(&w), c);
        }
        assert_eq!(got, want);

        let got = half_shuffle_right(&wp(d, "1.2.3"), &wp(d, "2.4")).unwrap();
        let mut want = WordPoly::zero(d);
        for (w, c) in half_shuffle_oracle(&[1, 2, 3], &[2, 4]) {
            want.add_term(Word::from_letters(&w), c);
        }
        assert_eq!(got, want);
    }

    #[test]
    fn pair_levy_area_and_unit() {
        let s3 = 3.0f64.sqrt();
        let path = SampledPath::new(
            vec![0.0, 2.0, 8.0, 9.0],
            vec![0.0, 0.0, 2.0, 2.0 * s3, 8.0, 2.0 * s3, 9.0, 3.0 * s3],
            2,
        )
        .unwrap();
        let sig = signature(&path, 2).unwrap();
        let mut f = wp(2, "1.2");
        f.add_scaled(&wp(2, "2.1"), -1.0);
        // <e12 - e21, S> = 2 * signed Levy area = -6*sqrt(3)
        assert_relative_eq!(pair(&f, &sig).unwrap(), -6.0 * s3, epsilon = 1e-10);
        assert_relative_eq!(pair(&WordPoly::one(2), &sig).unwrap(), 1.0);
        let too_long = wp(2, "1.1.1");
        assert!(pair(&too_long, &sig).is_err());
    }

    #[test]
    fn shuffle_identity_on_random_paths() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..20 {
            let d = rng.gen_range(2..=3usize);
            let times: Vec<f64> = (0..8).map(|i| i as f64).collect();
            let mut values = vec![0.0; 8 * d];
            for v in values.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            let path = SampledPath::new(times, values, d).unwrap();
            let (r, s) = (rng.gen_range(1..=2usize), rng.gen_range(1..=2usize));
            let uw: Vec<u8> = (0..r).map(|_| rng.gen_range(1..=d as u8)).collect();
            let vw: Vec<u8> = (0..s).map(|_| rng.gen_range(1..=d as u8)).collect();
            let u = WordPoly::from_word(d, Word::from_letters(&uw)).unwrap();
            let v = WordPoly::from_word(d, Word::from_letters(&vw)).unwrap();
            let sig = signature(&path, r + s).unwrap();
            let lhs = pair(&shuffle(&u, &v).unwrap(), &sig).unwrap();
            let rhs = pair(&u, &sig).unwrap() * pair(&v, &sig).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-8, epsilon = 1e-10);
        }
    }

    #[test]
    fn pair_on_path_matches_dense() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..10 {
            let d = rng.gen_range(2..=4usize);
            let times: Vec<f64> = (0..6).map(|i| i as f64).collect();
            let mut values = vec![0.0; 6 * d];
            for v in values.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            let path = SampledPath::new(times, values, d).unwrap();
            let mut f = WordPoly::zero(d);
            for _ in 0..4 {
                let len = rng.gen_range(1..=4usize);
                let letters: Vec<u8> =
                    (0..len).map(|_| rng.gen_range(1..=d as u8)).collect();
                f.add_term(Word::from_letters(&letters), rng.gen_range(-1.0..1.0));
            }
            let dense = pair(&f, &signature(&path, 4).unwrap()).unwrap();
            let lazy = pair_on_path(&f, &path).unwrap();
            assert_relative_eq!(dense, lazy, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn pair_on_path_time_increment() {
        // f = e_1, channel 1 = t on [0, 2*pi]
        let n = 100;
        let times: Vec<f64> =
            (0..n).map(|i| 2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).collect();
        let values = times.clone();
        let path = SampledPath::univariate(times, values).unwrap();
        let f = wp(1, "1");
        assert_relative_eq!(
            pair_on_path(&f, &path).unwrap(),
            2.0 * std::f64::consts::PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn half_shuffle_integral_identity() {
        // <u > v, S> = int <u, S_t> d<v, S_t>, trapezoid over a dense grid
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let n = 10_000;
        let d = 2;
        let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut channels = Vec::new();
        for _ in 0..d {
            let (a1, a2) = (rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5));
            let (p1, p2) = (rng.gen_range(0.0..6.28), rng.gen_range(0.0..6.28));
            channels.push(
                times
                    .iter()
                    .map(|&t| a1 * (4.0 * t + p1).sin() + a2 * (9.0 * t + p2).cos())
                    .collect::<Vec<f64>>(),
            );
        }
        let path = SampledPath::from_channels(times, &channels).unwrap();
        let u = wp(d, "1.2");
        let v = wp(d, "2.1");
        let exact = pair_on_path(&half_shuffle_right(&u, &v).unwrap(), &path).unwrap();
        let mut ev = PathFunctionalEvaluator::new(&[&u, &v], d).unwrap();
        let mut acc = 0.0;
        let (mut fu_prev, mut fv_prev) = (ev.value(0), ev.value(1));
        let mut inc = vec![0.0; d];
        for s in 0..path.segments() {
            path.increment(s, &mut inc);
            ev.push_segment(&inc);
            let (fu, fv) = (ev.value(0), ev.value(1));
            acc += 0.5 * (fu + fu_prev) * (fv - fv_prev);
            fu_prev = fu;
            fv_prev = fv;
        }
        assert_relative_eq!(exact, acc, max_relative = 1e-4);
    }
}
