//! Closed-form recovery of Fourier and orthogonal-polynomial coefficients
//! from path signatures, plus the augmentation and reconstruction
//! bookkeeping around it.
//!
//! The coefficient functionals are linear combinations of words paired
//! against the signature of an augmented path. Augmentation is fully
//! deterministic: an optional zero-value sample is prepended so the value
//! channel starts at 0, the path is optionally mirror-concatenated with its
//! reversal, and time is reparameterised affinely onto the basis interval.
//! The [`AugmentMap`] records this bookkeeping so reconstruction can map
//! original timestamps back into basis coordinates.

mod family;
mod fourier;
mod ortho;

pub use family::{make_family, FamilyKind, OrthoFamily};
pub use fourier::{
    augment_fourier, augment_fourier_opts, fourier_from_tensor, fourier_functionals,
    invert_fourier, FourierCoeffs,
};
pub use ortho::{
    augment_ortho, augment_ortho_opts, invert_ortho, invert_ortho_taylor, ortho_from_tensor,
    ortho_functionals, taylor_weight_functionals, PolyCoeffData, PolyCoeffs,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::SampledPath;
use crate::words::WordPoly;

/// Affine reparameterisation and augmentation bookkeeping recorded when a
/// path is prepared for inversion, and replayed by [`reconstruct`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentMap {
    /// `s = scale * t + offset` maps original time to basis coordinates.
    pub scale: f64,
    pub offset: f64,
    /// Basis interval `[a, b]` the augmented path spans.
    pub interval: (f64, f64),
    pub mirror: bool,
    /// Whether a zero-value sample was prepended.
    pub prepended: bool,
    /// Original `[t_first, t_last]` of the source path.
    pub source_interval: (f64, f64),
}

impl AugmentMap {
    pub fn to_basis(&self, t: f64) -> f64 {
        self.scale * t + self.offset
    }

    fn check_on_interval(&self, s: f64) -> Result<()> {
        let (a, b) = self.interval;
        let tol = 1e-9 * (b - a).abs();
        if s < a - tol || s > b + tol {
            return Err(Error::Domain(format!(
                "grid point maps to {s}, outside the basis interval [{a}, {b}]"
            )));
        }
        Ok(())
    }
}

/// Prepend a zero-value sample when needed, optionally mirror, and map time
/// affinely onto `target`. Returns the mapped grid, the value channel, and
/// the bookkeeping record.
pub(crate) fn prepend_and_reparam(
    path: &SampledPath,
    mirror: bool,
    target: (f64, f64),
) -> Result<(Vec<f64>, Vec<f64>, AugmentMap)> {
    prepend_and_reparam_opts(path, mirror, target, false)
}

/// As [`prepend_and_reparam`], with `always_prepend` forcing the zero
/// sample even on paths that already start at zero. Dataset embeddings use
/// this so every path shares one bookkeeping record.
pub(crate) fn prepend_and_reparam_opts(
    path: &SampledPath,
    mirror: bool,
    target: (f64, f64),
    always_prepend: bool,
) -> Result<(Vec<f64>, Vec<f64>, AugmentMap)> {
    if path.dim() != 1 {
        return Err(Error::Input(format!(
            "inversion augments univariate paths; got dimension {}",
            path.dim()
        )));
    }
    let t = path.times();
    let x = path.channel(0);
    let source_interval = (t[0], t[t.len() - 1]);

    let prepended = always_prepend || x[0] != 0.0;
    let mut times: Vec<f64> = Vec::with_capacity(2 * t.len() + 1);
    let mut values: Vec<f64> = Vec::with_capacity(2 * t.len() + 1);
    if prepended {
        times.push(t[0] - (t[1] - t[0]));
        values.push(0.0);
    }
    times.extend_from_slice(t);
    values.extend_from_slice(&x);

    if mirror {
        let end = *times.last().expect("nonempty");
        for j in (0..times.len() - 1).rev() {
            times.push(2.0 * end - times[j]);
            values.push(values[j]);
        }
    }

    let (a, b) = target;
    let span = *times.last().unwrap() - times[0];
    let scale = (b - a) / span;
    let offset = a - scale * times[0];
    for s in times.iter_mut() {
        *s = scale * *s + offset;
    }
    // pin the endpoints exactly to the interval
    *times.first_mut().unwrap() = a;
    *times.last_mut().unwrap() = b;

    let map = AugmentMap {
        scale,
        offset,
        interval: target,
        mirror,
        prepended,
        source_interval,
    };
    Ok((times, values, map))
}

/// Which basis a functional set retrieves coefficients for.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalBasis {
    Fourier,
    Ortho(FamilyKind),
    /// Orthogonal-polynomial inversion with the weight replaced by its
    /// degree-`taylor_terms` Taylor polynomial about the interval start.
    OrthoTaylor { kind: FamilyKind, taylor_terms: usize },
}

/// An ordered collection of inversion functionals together with the
/// signature depth needed to evaluate them.
#[derive(Debug, Clone)]
pub struct FunctionalSet {
    pub basis: FunctionalBasis,
    pub order: usize,
    /// Fourier: `[a0, a_1..a_N, b_1..b_N]`; polynomials: `[l_0..l_N]`.
    pub functionals: Vec<WordPoly>,
    pub required_depth: usize,
}

impl FunctionalSet {
    /// Longest word appearing in any functional.
    pub fn max_word_len(&self) -> usize {
        self.functionals.iter().map(|f| f.max_len()).max().unwrap_or(0)
    }
}

/// Coefficients recovered by either inversion route.
#[derive(Debug, Clone)]
pub enum BasisCoeffs {
    Fourier(FourierCoeffs),
    Ortho(PolyCoeffs),
}

impl BasisCoeffs {
    pub fn augment_map(&self) -> &AugmentMap {
        match self {
            BasisCoeffs::Fourier(c) => &c.map,
            BasisCoeffs::Ortho(c) => &c.map,
        }
    }
}

/// Evaluate the truncated series on a grid of original timestamps, undoing
/// the affine reparameterisation (and implicitly the prepend/mirror
/// bookkeeping, which lives outside the requested grid).
pub fn reconstruct(coeffs: &BasisCoeffs, grid: &[f64]) -> Result<SampledPath> {
    if grid.len() < 2 {
        return Err(Error::Input("reconstruction grid needs at least 2 points".into()));
    }
    let map = coeffs.augment_map();
    let mut values = Vec::with_capacity(grid.len());
    match coeffs {
        BasisCoeffs::Fourier(c) => {
            for &t in grid {
                let s = map.to_basis(t);
                map.check_on_interval(s)?;
                values.push(c.eval_series(s));
            }
        }
        BasisCoeffs::Ortho(c) => {
            for &t in grid {
                let s = map.to_basis(t);
                map.check_on_interval(s)?;
                values.push(c.eval_series(s)?);
            }
        }
    }
    SampledPath::univariate(grid.to_vec(), values)
}
