//! Fourier-coefficient recovery from signatures.
//!
//! A periodic path `x : [0, 2pi] -> R` with `x(0) = 0` is augmented to
//! `(t, sin t, cos t - 1, x(t))`; its Fourier coefficients are then linear
//! functionals on the signature of the augmented path, built from
//! multiple-angle expansions of `cos(nt)` and `sin(nt)` in shuffle powers
//! of the sin/cos channels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::tensor::TruncatedTensor;
use crate::words::{
    half_shuffle_right, pair, shuffle, PathFunctionalEvaluator, Word, WordPoly,
};

use super::{AugmentMap, FunctionalBasis, FunctionalSet};

/// Fourier coefficients `a_0`, `a_1..a_N`, `b_1..b_N` of an augmented path,
/// with the augmentation bookkeeping needed to reconstruct on the original
/// time axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoeffs {
    pub a0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub map: AugmentMap,
}

impl FourierCoeffs {
    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// Truncated series at basis coordinate `s` in [0, 2pi].
    pub fn eval_series(&self, s: f64) -> f64 {
        let mut acc = self.a0;
        for m in 1..=self.a.len() {
            let mf = m as f64;
            acc += self.a[m - 1] * (mf * s).cos() + self.b[m - 1] * (mf * s).sin();
        }
        acc
    }
}

/// Augment a univariate path for Fourier inversion: optional mirror
/// concatenation, start-at-zero prepend, affine reparameterisation to
/// [0, 2pi], and channels `(t, sin t, cos t - 1, x(t))`.
pub fn augment_fourier(
    path: &SampledPath,
    mirror: bool,
) -> Result<(SampledPath, AugmentMap)> {
    augment_fourier_opts(path, mirror, false)
}

/// As [`augment_fourier`] with an unconditional start-at-zero prepend, so
/// all paths of a dataset share identical bookkeeping.
pub fn augment_fourier_opts(
    path: &SampledPath,
    mirror: bool,
    always_prepend: bool,
) -> Result<(SampledPath, AugmentMap)> {
    let (times, xvals, map) =
        super::prepend_and_reparam_opts(path, mirror, (0.0, 2.0 * PI), always_prepend)?;
    let n = times.len();
    let mut values = Vec::with_capacity(4 * n);
    for i in 0..n {
        let s = times[i];
        values.push(s);
        values.push(s.sin());
        values.push(s.cos() - 1.0);
        values.push(xvals[i]);
    }
    Ok((SampledPath::new(times, values, 4)?, map))
}

// cos(j*pi/2) and sin(j*pi/2) for integer j, exactly
fn cos_half_pi(j: usize) -> f64 {
    match j % 4 {
        0 => 1.0,
        2 => -1.0,
        _ => 0.0,
    }
}

fn sin_half_pi(j: usize) -> f64 {
    match j % 4 {
        1 => 1.0,
        3 => -1.0,
        _ => 0.0,
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Build the order-`N` Fourier functional set over the 4-channel
/// augmentation. Layout: `[a0, a_1..a_N, b_1..b_N]`; every word has length
/// at most `N + 2`, the declared required depth.
pub fn fourier_functionals(order: usize) -> FunctionalSet {
    let d = 4;
    let e1 = WordPoly::from_word(d, Word::letter(1)).expect("alphabet");
    let e4 = WordPoly::from_word(d, Word::letter(4)).expect("alphabet");

    let mut functionals = Vec::with_capacity(2 * order + 1);
    // a0 = (1/2pi) <e4 > e1, S>
    functionals.push(half_shuffle_right(&e4, &e1).expect("nonempty").scaled(1.0 / (2.0 * PI)));

    // shuffle powers of the sin channel (letter 2) and cos-1 channel (letter 3)
    let letter_power = |letter: u8, p: usize| -> WordPoly {
        let mut fact = 1.0;
        for i in 1..=p {
            fact *= i as f64;
        }
        let mut poly = WordPoly::zero(d);
        poly.add_term(Word::from_letters(&vec![letter; p]), fact);
        poly
    };

    let mut a_parts = Vec::with_capacity(order);
    let mut b_parts = Vec::with_capacity(order);
    for m in 1..=order {
        let mut am = WordPoly::zero(d);
        let mut bm = WordPoly::zero(d);
        for k in 0..=m {
            let cw = cos_half_pi(m - k);
            let sw = sin_half_pi(m - k);
            if cw == 0.0 && sw == 0.0 {
                continue;
            }
            for q in 0..=k {
                let weight = binomial(m, k) * binomial(k, q) / PI;
                let sin_pow = letter_power(2, m - k);
                let cos_pow = letter_power(3, q);
                let inner = shuffle(&shuffle(&e4, &sin_pow).expect("dims"), &cos_pow)
                    .expect("dims");
                let term = half_shuffle_right(&inner, &e1).expect("nonempty");
                if cw != 0.0 {
                    am.add_scaled(&term, weight * cw);
                }
                if sw != 0.0 {
                    bm.add_scaled(&term, weight * sw);
                }
            }
        }
        a_parts.push(am);
        b_parts.push(bm);
    }
    functionals.extend(a_parts);
    functionals.extend(b_parts);

    FunctionalSet {
        basis: FunctionalBasis::Fourier,
        order,
        functionals,
        required_depth: order + 2,
    }
}

fn coeffs_from_values(order: usize, values: &[f64], map: AugmentMap) -> FourierCoeffs {
    FourierCoeffs {
        a0: values[0],
        a: values[1..=order].to_vec(),
        b: values[order + 1..=2 * order].to_vec(),
        map,
    }
}

/// Recover Fourier coefficients of a univariate path by evaluating the
/// order-`N` functionals along the augmented path.
pub fn invert_fourier(path: &SampledPath, order: usize, mirror: bool) -> Result<FourierCoeffs> {
    let (aug, map) = augment_fourier(path, mirror)?;
    let set = fourier_functionals(order);
    let refs: Vec<&WordPoly> = set.functionals.iter().collect();
    let mut ev = PathFunctionalEvaluator::new(&refs, 4)?;
    ev.push_path(&aug)?;
    Ok(coeffs_from_values(order, &ev.values(), map))
}

/// Recover Fourier coefficients from a dense signature of the augmented
/// path (used when the signature was produced elsewhere, e.g. by the
/// generative pipeline). The tensor must have dimension 4 and depth at
/// least `order + 2`.
pub fn fourier_from_tensor(
    sig: &TruncatedTensor,
    order: usize,
    map: AugmentMap,
) -> Result<FourierCoeffs> {
    if sig.dim() != 4 {
        return Err(Error::Shape(format!(
            "Fourier inversion needs a 4-channel signature, got dimension {}",
            sig.dim()
        )));
    }
    let set = fourier_functionals(order);
    if sig.depth() < set.required_depth {
        return Err(Error::Shape(format!(
            "order-{order} Fourier inversion needs depth {}, signature has {}",
            set.required_depth,
            sig.depth()
        )));
    }
    let values: Result<Vec<f64>> =
        set.functionals.iter().map(|f| pair(f, sig)).collect();
    Ok(coeffs_from_values(order, &values?, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn augment_channels() {
        let times = grid(101, 0.0, 2.0 * PI);
        let zeros = vec![0.0; 101];
        let p = SampledPath::univariate(times.clone(), zeros).unwrap();
        let (aug, map) = augment_fourier(&p, false).unwrap();
        assert_eq!(aug.dim(), 4);
        assert!(!map.prepended);
        // channel 4 identically zero, channel 2 starts and ends at 0
        for i in 0..aug.len() {
            assert_eq!(aug.value(i, 3), 0.0);
        }
        assert_relative_eq!(aug.value(0, 1), 0.0, epsilon = 1e-12);
        assert_relative_eq!(aug.value(aug.len() - 1, 1), 0.0, epsilon = 1e-12);
        // channel 3 = cos(t) - 1: 0 at t=0, -2 at t=pi
        assert_relative_eq!(aug.value(0, 2), 0.0, epsilon = 1e-12);
        let mid = aug.times().iter().position(|&t| (t - PI).abs() < 1e-9).unwrap();
        assert_relative_eq!(aug.value(mid, 2), -2.0, epsilon = 1e-12);
    }

    #[test]
    fn mirror_augment_length_and_symmetry() {
        let p =
            SampledPath::univariate(vec![0.0, 0.5, 1.0, 1.5], vec![1.0, 2.0, -1.0, 0.5])
                .unwrap();
        let (aug, map) = augment_fourier(&p, true).unwrap();
        assert!(map.prepended && map.mirror);
        assert_eq!(aug.len(), 2 * 4 + 1);
        let xs = aug.channel(3);
        for j in 0..xs.len() {
            assert_eq!(xs[j], xs[xs.len() - 1 - j]);
        }
    }

    #[test]
    fn functional_set_order_zero() {
        let set = fourier_functionals(0);
        assert_eq!(set.functionals.len(), 1);
        let f = &set.functionals[0];
        assert_eq!(f.len(), 1);
        assert_relative_eq!(
            f.coeff(&Word::parse("4.1").unwrap()),
            1.0 / (2.0 * PI),
            max_relative = 1e-15
        );
    }

    #[test]
    fn b1_functional_is_single_shuffle_term() {
        // at m=1 only (k=0, q=0) survives: b1 = (1/pi) (e4 sh e2) > e1
        let set = fourier_functionals(1);
        let b1 = &set.functionals[2];
        let mut want = shuffle(
            &WordPoly::from_word(4, Word::letter(4)).unwrap(),
            &WordPoly::from_word(4, Word::letter(2)).unwrap(),
        )
        .unwrap();
        want = half_shuffle_right(&want, &WordPoly::from_word(4, Word::letter(1)).unwrap())
            .unwrap();
        want.scale(1.0 / PI);
        assert_eq!(b1, &want);
    }

    #[test]
    fn word_length_matches_required_depth() {
        for order in [0usize, 1, 3, 5] {
            let set = fourier_functionals(order);
            assert_eq!(set.required_depth, order + 2);
            assert_eq!(set.max_word_len(), order + 2);
        }
    }

    #[test]
    fn zero_path_gives_zero_coefficients() {
        let times = grid(257, 0.0, 1.0);
        let p = SampledPath::univariate(times, vec![0.0; 257]).unwrap();
        let c = invert_fourier(&p, 3, false).unwrap();
        assert_eq!(c.a0, 0.0);
        assert!(c.a.iter().chain(c.b.iter()).all(|&v| v == 0.0));
    }

    #[test]
    fn recovers_sine_coefficients() {
        let n = 10_000;
        let times = grid(n, 0.0, 2.0 * PI);
        let values: Vec<f64> = times.iter().map(|&t| t.sin()).collect();
        let p = SampledPath::univariate(times, values).unwrap();
        let c = invert_fourier(&p, 3, false).unwrap();
        assert_relative_eq!(c.b[0], 1.0, epsilon = 1e-3);
        assert!(c.a0.abs() < 1e-3);
        for &v in c.a.iter().chain(c.b[1..].iter()) {
            assert!(v.abs() < 1e-3, "stray coefficient {v}");
        }
    }

    // trapezoid quadrature of the defining integrals over the augmented path
    fn quadrature_oracle(aug: &SampledPath, order: usize) -> FourierCoeffs {
        let ts = aug.times();
        let xs = aug.channel(3);
        let integral = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
            let mut acc = 0.0;
            for i in 0..ts.len() - 1 {
                let h = ts[i + 1] - ts[i];
                acc += 0.5 * h * (f(ts[i], xs[i]) + f(ts[i + 1], xs[i + 1]));
            }
            acc
        };
        let a0 = integral(&|_, x| x) / (2.0 * PI);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for m in 1..=order {
            let mf = m as f64;
            a.push(integral(&|t, x| x * (mf * t).cos()) / PI);
            b.push(integral(&|t, x| x * (mf * t).sin()) / PI);
        }
        FourierCoeffs {
            a0,
            a,
            b,
            map: AugmentMap {
                scale: 1.0,
                offset: 0.0,
                interval: (0.0, 2.0 * PI),
                mirror: false,
                prepended: false,
                source_interval: (0.0, 2.0 * PI),
            },
        }
    }

    #[test]
    fn shifted_trig_polynomial_matches_quadrature_oracle() {
        // x(t) = 2 sin t + 0.5 cos 2t - 0.5, value-shifted to start at 0
        let n = 10_000;
        let times = grid(n, 0.0, 2.0 * PI);
        let values: Vec<f64> =
            times.iter().map(|&t| 2.0 * t.sin() + 0.5 * (2.0 * t).cos() - 0.5).collect();
        let p = SampledPath::univariate(times, values).unwrap();
        let (aug, _) = augment_fourier(&p, false).unwrap();
        let got = invert_fourier(&p, 2, false).unwrap();
        let want = quadrature_oracle(&aug, 2);
        assert_relative_eq!(got.a0, want.a0, epsilon = 1e-3);
        for m in 0..2 {
            assert_relative_eq!(got.a[m], want.a[m], epsilon = 1e-3);
            assert_relative_eq!(got.b[m], want.b[m], epsilon = 1e-3);
        }
        // sanity against the true coefficients of the generating series
        assert_relative_eq!(got.a0, -0.5, epsilon = 1e-3);
        assert_relative_eq!(got.b[0], 2.0, epsilon = 1e-3);
        assert_relative_eq!(got.a[1], 0.5, epsilon = 1e-3);
    }

    #[test]
    fn linearity_in_the_path() {
        let n = 600;
        let times = grid(n, 0.0, 1.0);
        // both start nonzero so all three paths share the prepend decision
        let x: Vec<f64> = times.iter().map(|&t| (3.0 * t).sin() + 0.2).collect();
        let y: Vec<f64> = times.iter().map(|&t| (5.0 * t).cos() - 0.5).collect();
        let c = 1.7;
        let combo: Vec<f64> =
            x.iter().zip(y.iter()).map(|(&u, &v)| c * u + v).collect();
        let px = SampledPath::univariate(times.clone(), x).unwrap();
        let py = SampledPath::univariate(times.clone(), y).unwrap();
        let pc = SampledPath::univariate(times, combo).unwrap();
        let (fx, fy, fc) = (
            invert_fourier(&px, 3, true).unwrap(),
            invert_fourier(&py, 3, true).unwrap(),
            invert_fourier(&pc, 3, true).unwrap(),
        );
        assert_relative_eq!(fc.a0, c * fx.a0 + fy.a0, max_relative = 1e-10, epsilon = 1e-12);
        for m in 0..3 {
            assert_relative_eq!(
                fc.a[m],
                c * fx.a[m] + fy.a[m],
                max_relative = 1e-10,
                epsilon = 1e-12
            );
            assert_relative_eq!(
                fc.b[m],
                c * fx.b[m] + fy.b[m],
                max_relative = 1e-10,
                epsilon = 1e-12
            );
        }
    }
}
