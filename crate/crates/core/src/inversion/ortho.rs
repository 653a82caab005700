//! Orthogonal-polynomial coefficient recovery from signatures.
//!
//! For a path `x : [a, b] -> R` with `x(a) = 0` and augmentation
//! `(t, w(t) x(t))`, the expansion coefficients `alpha_n` are linear
//! functionals `l_n` on the signature, built by a three-term recurrence
//! mirroring the polynomial recurrence:
//!
//! `l_n = A_n r_n (e_1 > l_{n-1}) + (A_n a + B_n) r_n l_{n-1} + C_n q_n l_{n-2}`
//!
//! with `r_n = (p_{n-1},p_{n-1})/(p_n,p_n)`, `q_n = (p_{n-2},p_{n-2})/(p_n,p_n)`,
//! `l_0 = (A_0/(p_0,p_0)) e_21` and
//! `l_1 = (A_1/(p_1,p_1))(e_121 + e_211) + ((A_1 a + B_1)/(p_1,p_1)) e_21`.
//!
//! Shift-and-scale Hermite families run pointwise: one functional set per
//! reconstruction grid point, with the weight re-centered there and
//! truncated to a 6-sigma window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::tensor::TruncatedTensor;
use crate::words::{half_shuffle_right, pair, PathFunctionalEvaluator, Word, WordPoly};

use super::family::{FamilyKind, OrthoFamily};
use super::{prepend_and_reparam, AugmentMap, FunctionalBasis, FunctionalSet};

/// Coefficients of an orthogonal-polynomial inversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeffs {
    pub family: OrthoFamily,
    pub data: PolyCoeffData,
    pub map: AugmentMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PolyCoeffData {
    /// One coefficient vector `alpha_0..alpha_N` for the whole interval.
    Global(Vec<f64>),
    /// Pointwise (Hermite) inversion: per-center coefficient vectors plus
    /// the reconstructed value at each center.
    Pointwise { centers: Vec<f64>, alpha: Vec<Vec<f64>>, values: Vec<f64> },
}

impl PolyCoeffs {
    pub fn order(&self) -> usize {
        match &self.data {
            PolyCoeffData::Global(a) => a.len().saturating_sub(1),
            PolyCoeffData::Pointwise { alpha, .. } => {
                alpha.first().map(|a| a.len().saturating_sub(1)).unwrap_or(0)
            }
        }
    }

    /// Truncated series at basis coordinate `s`.
    pub fn eval_series(&self, s: f64) -> Result<f64> {
        match &self.data {
            PolyCoeffData::Global(alpha) => {
                let mut acc = 0.0;
                for (n, &c) in alpha.iter().enumerate() {
                    acc += c * self.family.eval(n, s);
                }
                Ok(acc)
            }
            PolyCoeffData::Pointwise { centers, values, .. } => {
                // centers are the mapped path grid; interpolate between them
                if centers.is_empty() {
                    return Err(Error::Domain("empty pointwise inversion".into()));
                }
                let i = match centers.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
                    Ok(i) => return Ok(values[i]),
                    Err(i) => i,
                };
                if i == 0 {
                    return Ok(values[0]);
                }
                if i >= centers.len() {
                    return Ok(*values.last().unwrap());
                }
                let w = (s - centers[i - 1]) / (centers[i] - centers[i - 1]);
                Ok(values[i - 1] * (1.0 - w) + values[i] * w)
            }
        }
    }
}

/// Augment a univariate path for a global-family inversion: prepend to
/// start at zero, map time onto the family interval, and emit the
/// 2-channel path `(t, w(t) x(t))`.
pub fn augment_ortho(
    path: &SampledPath,
    family: &OrthoFamily,
) -> Result<(SampledPath, AugmentMap)> {
    augment_ortho_opts(path, family, false)
}

/// As [`augment_ortho`] with an unconditional start-at-zero prepend for
/// uniform dataset bookkeeping.
pub fn augment_ortho_opts(
    path: &SampledPath,
    family: &OrthoFamily,
    always_prepend: bool,
) -> Result<(SampledPath, AugmentMap)> {
    if family.is_pointwise() {
        return Err(Error::Domain(
            "pointwise Hermite families window per grid point; use invert_ortho".into(),
        ));
    }
    let (times, xvals, map) =
        super::prepend_and_reparam_opts(path, false, family.interval(), always_prepend)?;
    let mut values = Vec::with_capacity(2 * times.len());
    for (i, &s) in times.iter().enumerate() {
        let w = family.weight(s);
        if !w.is_finite() {
            return Err(Error::Domain(format!(
                "weight is not finite at t = {s} on the inversion interval"
            )));
        }
        values.push(s);
        values.push(w * xvals[i]);
    }
    Ok((SampledPath::new(times, values, 2)?, map))
}

// shared recurrence driver; `norms[n]` = (p_n, p_n), `a` = interval start
fn build_ell(
    family: &OrthoFamily,
    order: usize,
    a: f64,
    norms: &[f64],
) -> Vec<WordPoly> {
    let d = 2;
    let e1 = WordPoly::from_word(d, Word::letter(1)).expect("alphabet");
    let e21 = WordPoly::from_word(d, Word::parse("2.1").unwrap()).expect("alphabet");

    let mut ells: Vec<WordPoly> = Vec::with_capacity(order + 1);
    // l_0 = (A_0 / (p_0,p_0)) e_21 with A_0 = 1
    ells.push(e21.scaled(1.0 / norms[0]));
    if order >= 1 {
        let (a1, b1) = (family.rec_a(1), family.rec_b(1));
        let mut l1 = WordPoly::zero(d);
        l1.add_term(Word::parse("1.2.1").unwrap(), a1 / norms[1]);
        l1.add_term(Word::parse("2.1.1").unwrap(), a1 / norms[1]);
        l1.add_scaled(&e21, (a1 * a + b1) / norms[1]);
        ells.push(l1);
    }
    for n in 2..=order {
        let (an, bn, cn) = (family.rec_a(n), family.rec_b(n), family.rec_c(n));
        let r = norms[n - 1] / norms[n];
        let q = norms[n - 2] / norms[n];
        let mut ln = half_shuffle_right(&e1, &ells[n - 1]).expect("nonempty");
        ln.scale(an * r);
        ln.add_scaled(&ells[n - 1], (an * a + bn) * r);
        ln.add_scaled(&ells[n - 2], cn * q);
        ells.push(ln);
    }
    ells
}

fn family_norms(family: &OrthoFamily, order: usize) -> Vec<f64> {
    (0..=order).map(|n| family.norm(n)).collect()
}

/// Order-`N` inversion functionals for a global family over the 2-channel
/// augmentation `(t, w(t) x(t))`; required depth `N + 2`.
pub fn ortho_functionals(family: &OrthoFamily, order: usize) -> FunctionalSet {
    let ells = build_ell(family, order, family.interval().0, &family_norms(family, order));
    FunctionalSet {
        basis: FunctionalBasis::Ortho(family.kind()),
        order,
        functionals: ells,
        required_depth: order + 2,
    }
}

/// Order-`N` functionals over the unweighted augmentation `(t, x(t))`,
/// with the weight replaced by its degree-`M` Taylor polynomial about the
/// interval start: `l_0 = (A_0/(p_0,p_0)) sum_i w_i c_i` with
/// `c_i = (e_2 sh e_1^(sh i)) > e_1`, then the same recurrence. Required
/// depth `N + M + 2`. Convergence of the Taylor series over the interval is
/// the caller's responsibility.
pub fn taylor_weight_functionals(
    family: &OrthoFamily,
    order: usize,
    taylor_terms: usize,
) -> Result<FunctionalSet> {
    let d = 2;
    let m = taylor_terms;
    let wcoef = family.weight_taylor(m)?;
    let e1 = WordPoly::from_word(d, Word::letter(1)).expect("alphabet");
    let a = family.interval().0;
    let norms = family_norms(family, order);

    // c_i = (e_2 sh e_1^(sh i)) > e_1 = i! * (sum of '2' placed in a run of
    // i '1's), then a trailing '1'
    let c_poly = |i: usize| -> WordPoly {
        let mut fact = 1.0;
        for k in 1..=i {
            fact *= k as f64;
        }
        let mut p = WordPoly::zero(d);
        for pos in 0..=i {
            let mut letters = vec![1u8; i + 2];
            letters[pos] = 2;
            p.add_term(Word::from_letters(&letters), fact);
        }
        p
    };

    let mut ells: Vec<WordPoly> = Vec::with_capacity(order + 1);
    let mut l0 = WordPoly::zero(d);
    for (i, &wi) in wcoef.iter().enumerate() {
        l0.add_scaled(&c_poly(i), wi / norms[0]);
    }
    ells.push(l0);
    if order >= 1 {
        let (a1, b1) = (family.rec_a(1), family.rec_b(1));
        let mut l1 = WordPoly::zero(d);
        for (i, &wi) in wcoef.iter().enumerate() {
            l1.add_scaled(&c_poly(i + 1), wi * a1 / norms[1]);
            l1.add_scaled(&c_poly(i), wi * (a1 * a + b1) / norms[1]);
        }
        ells.push(l1);
    }
    for n in 2..=order {
        let (an, bn, cn) = (family.rec_a(n), family.rec_b(n), family.rec_c(n));
        let r = norms[n - 1] / norms[n];
        let q = norms[n - 2] / norms[n];
        let mut ln = half_shuffle_right(&e1, &ells[n - 1]).expect("nonempty");
        ln.scale(an * r);
        ln.add_scaled(&ells[n - 1], (an * a + bn) * r);
        ln.add_scaled(&ells[n - 2], cn * q);
        ells.push(ln);
    }
    Ok(FunctionalSet {
        basis: FunctionalBasis::OrthoTaylor { kind: family.kind(), taylor_terms },
        order,
        functionals: ells,
        required_depth: order + m + 2,
    })
}

fn evaluate_set(set: &FunctionalSet, aug: &SampledPath) -> Result<Vec<f64>> {
    let refs: Vec<&WordPoly> = set.functionals.iter().collect();
    let mut ev = PathFunctionalEvaluator::new(&refs, 2)?;
    ev.push_path(aug)?;
    Ok(ev.values())
}

/// Recover orthogonal-polynomial coefficients of a univariate path. Global
/// families evaluate one functional set over `(t, w(t) x(t))`; Hermite
/// shift-and-scale families run pointwise over the path's own grid.
pub fn invert_ortho(path: &SampledPath, family: &OrthoFamily, order: usize) -> Result<PolyCoeffs> {
    if family.is_pointwise() {
        return invert_hermite_pointwise(path, family, order);
    }
    let (aug, map) = augment_ortho(path, family)?;
    let set = ortho_functionals(family, order);
    let alpha = evaluate_set(&set, &aug)?;
    Ok(PolyCoeffs { family: *family, data: PolyCoeffData::Global(alpha), map })
}

/// Taylor-weight variant of [`invert_ortho`] over the unweighted
/// augmentation `(t, x(t))`. Not available for pointwise families.
pub fn invert_ortho_taylor(
    path: &SampledPath,
    family: &OrthoFamily,
    order: usize,
    taylor_terms: usize,
) -> Result<PolyCoeffs> {
    if family.is_pointwise() {
        return Err(Error::Domain(
            "Taylor-weight inversion is not defined for pointwise families".into(),
        ));
    }
    let set = taylor_weight_functionals(family, order, taylor_terms)?;
    let (times, xvals, map) = prepend_and_reparam(path, false, family.interval())?;
    let mut values = Vec::with_capacity(2 * times.len());
    for (i, &s) in times.iter().enumerate() {
        values.push(s);
        values.push(xvals[i]);
    }
    let aug = SampledPath::new(times, values, 2)?;
    let alpha = evaluate_set(&set, &aug)?;
    Ok(PolyCoeffs { family: *family, data: PolyCoeffData::Global(alpha), map })
}

/// Recover coefficients from a dense signature of the weighted augmentation
/// (global families only).
pub fn ortho_from_tensor(
    sig: &TruncatedTensor,
    family: &OrthoFamily,
    order: usize,
    map: AugmentMap,
) -> Result<PolyCoeffs> {
    if family.is_pointwise() {
        return Err(Error::Domain(
            "pointwise Hermite inversion needs the path, not a single signature".into(),
        ));
    }
    if sig.dim() != 2 {
        return Err(Error::Shape(format!(
            "polynomial inversion needs a 2-channel signature, got dimension {}",
            sig.dim()
        )));
    }
    let set = ortho_functionals(family, order);
    if sig.depth() < set.required_depth {
        return Err(Error::Shape(format!(
            "order-{order} inversion needs depth {}, signature has {}",
            set.required_depth,
            sig.depth()
        )));
    }
    let alpha: Result<Vec<f64>> = set.functionals.iter().map(|f| pair(f, sig)).collect();
    Ok(PolyCoeffs { family: *family, data: PolyCoeffData::Global(alpha?), map })
}

// composite Simpson over a smooth integrand
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels.max(1);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

fn interp(times: &[f64], values: &[f64], t: f64) -> f64 {
    match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => values[i],
        Err(0) => values[0],
        Err(i) if i >= times.len() => *values.last().unwrap(),
        Err(i) => {
            let w = (t - times[i - 1]) / (times[i] - times[i - 1]);
            values[i - 1] * (1.0 - w) + values[i] * w
        }
    }
}

/// Pointwise Hermite inversion: for each path sample, re-center the weight
/// there, truncate to a 6-sigma window clipped to the data interval, and
/// evaluate `l_0..l_N` on the windowed augmentation. Within a window the
/// running value channel is shifted by its window-start value (restored
/// after reconstruction), which enforces the `x(a) = 0` premise exactly;
/// norms are integrated numerically over the truncated window so clipped
/// boundary windows stay consistent.
fn invert_hermite_pointwise(
    path: &SampledPath,
    family: &OrthoFamily,
    order: usize,
) -> Result<PolyCoeffs> {
    let FamilyKind::HermiteShiftScale { epsilon, .. } = family.kind() else {
        return Err(Error::Domain("pointwise inversion requires a Hermite family".into()));
    };
    if path.dim() != 1 {
        return Err(Error::Input(format!(
            "inversion augments univariate paths; got dimension {}",
            path.dim()
        )));
    }
    // no start-at-zero prepend here: each window shifts its own value
    // channel, so an artificial jump sample would only pollute the fit
    let t_src = path.times();
    let source_interval = (t_src[0], t_src[t_src.len() - 1]);
    let scale = 2.0 / (source_interval.1 - source_interval.0);
    let offset = -1.0 - scale * source_interval.0;
    let mut times: Vec<f64> = t_src.iter().map(|&t| scale * t + offset).collect();
    *times.first_mut().unwrap() = -1.0;
    *times.last_mut().unwrap() = 1.0;
    let xvals = path.channel(0);
    let map = AugmentMap {
        scale,
        offset,
        interval: (-1.0, 1.0),
        mirror: false,
        prepended: false,
        source_interval,
    };
    let (lo_all, hi_all) = (-1.0, 1.0);

    let mut centers = Vec::with_capacity(times.len());
    let mut alphas = Vec::with_capacity(times.len());
    let mut recon = Vec::with_capacity(times.len());
    for (ci, &c) in times.iter().enumerate() {
        let fam_c = OrthoFamily::hermite_shift_scale(c, epsilon)?;
        let lo = (c - 6.0 * epsilon).max(lo_all);
        let hi = (c + 6.0 * epsilon).min(hi_all);

        // window sub-path with interpolated endpoint samples
        let mut wt = vec![lo];
        let mut wx = vec![interp(&times, &xvals, lo)];
        for (i, &t) in times.iter().enumerate() {
            if t > lo && t < hi {
                wt.push(t);
                wx.push(xvals[i]);
            }
        }
        wt.push(hi);
        wx.push(interp(&times, &xvals, hi));

        let shift = wx[0];
        let norms: Vec<f64> = (0..=order)
            .map(|n| {
                simpson(
                    |t| {
                        let p = fam_c.eval(n, t);
                        p * p * fam_c.weight(t)
                    },
                    lo,
                    hi,
                    96,
                )
            })
            .collect();
        let ells = build_ell(&fam_c, order, lo, &norms);

        let mut values = Vec::with_capacity(2 * wt.len());
        for (i, &t) in wt.iter().enumerate() {
            values.push(t);
            values.push(fam_c.weight(t) * (wx[i] - shift));
        }
        let aug = SampledPath::new(wt, values, 2)?;
        let refs: Vec<&WordPoly> = ells.iter().collect();
        let mut ev = PathFunctionalEvaluator::new(&refs, 2)?;
        ev.push_path(&aug)?;
        let raw = ev.values();

        // On a clipped window the H_n lose orthogonality under the
        // truncated weight; the signature functionals still deliver the
        // exact moments m_n = (x, p_n), so solve the (path-independent)
        // Gram system to keep the fit a true projection.
        let m = nalgebra::DVector::from_iterator(
            order + 1,
            raw.iter().zip(norms.iter()).map(|(&a, &nn)| a * nn),
        );
        let mut gram = nalgebra::DMatrix::<f64>::zeros(order + 1, order + 1);
        for i in 0..=order {
            for j in i..=order {
                let g = simpson(
                    |t| fam_c.eval(i, t) * fam_c.eval(j, t) * fam_c.weight(t),
                    lo,
                    hi,
                    96,
                );
                gram[(i, j)] = g;
                gram[(j, i)] = g;
            }
        }
        let alpha: Vec<f64> = gram
            .lu()
            .solve(&m)
            .ok_or_else(|| Error::Numerical("singular Hermite window Gram matrix".into()))?
            .iter()
            .copied()
            .collect();

        let mut val = shift;
        for (n, &an) in alpha.iter().enumerate() {
            val += an * fam_c.eval(n, c);
        }
        centers.push(c);
        alphas.push(alpha);
        recon.push(val);
        let _ = ci;
    }
    Ok(PolyCoeffs {
        family: *family,
        data: PolyCoeffData::Pointwise { centers, alpha: alphas, values: recon },
        map,
    })
}
