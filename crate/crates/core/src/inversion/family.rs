//! Orthogonal polynomial families: three-term recurrence data, weight
//! functions, and inner-product norms.
//!
//! Every family satisfies `p_n = (A_n t + B_n) p_{n-1} + C_n p_{n-2}` with
//! `p_0 = 1`, `p_1 = A_1 t + B_1`. The constant `A_0` appearing in the base
//! inversion functional is fixed to 1 (consistent with `p_0 = 1`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Weight 1 on [-1, 1].
    Legendre,
    /// Weight (1-t)^alpha (1+t)^beta on [-1, 1]; requires alpha, beta > -1.
    Jacobi { alpha: f64, beta: f64 },
    /// Chebyshev T_n, weight 1/sqrt(1-t^2) on (-1, 1).
    Chebyshev,
    /// Shift-and-scale Hermite: weight exp(-(t-center)^2 / (2 eps^2)),
    /// numerically truncated to center +- 6 eps.
    HermiteShiftScale { center: f64, epsilon: f64 },
}

/// Recurrence data, weight, and norms for one orthogonal-polynomial system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthoFamily {
    kind: FamilyKind,
}

/// Construct a family, validating parameters.
pub fn make_family(kind: FamilyKind) -> Result<OrthoFamily> {
    OrthoFamily::new(kind)
}

impl OrthoFamily {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        match kind {
            FamilyKind::Jacobi { alpha, beta } => {
                if !(alpha > -1.0 && beta > -1.0) {
                    return Err(Error::Domain(format!(
                        "Jacobi parameters must exceed -1, got ({alpha}, {beta})"
                    )));
                }
            }
            FamilyKind::HermiteShiftScale { epsilon, center } => {
                if !(epsilon > 0.0) || !center.is_finite() {
                    return Err(Error::Domain(format!(
                        "Hermite shift-scale needs epsilon > 0 and finite center, got ({center}, {epsilon})"
                    )));
                }
            }
            _ => {}
        }
        Ok(Self { kind })
    }

    pub fn legendre() -> Self {
        Self { kind: FamilyKind::Legendre }
    }

    pub fn jacobi(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(FamilyKind::Jacobi { alpha, beta })
    }

    pub fn chebyshev() -> Self {
        Self { kind: FamilyKind::Chebyshev }
    }

    pub fn hermite_shift_scale(center: f64, epsilon: f64) -> Result<Self> {
        Self::new(FamilyKind::HermiteShiftScale { center, epsilon })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn is_pointwise(&self) -> bool {
        matches!(self.kind, FamilyKind::HermiteShiftScale { .. })
    }

    /// Natural orthogonality interval (Hermite: the 6-sigma truncation).
    pub fn interval(&self) -> (f64, f64) {
        match self.kind {
            FamilyKind::HermiteShiftScale { center, epsilon } => {
                (center - 6.0 * epsilon, center + 6.0 * epsilon)
            }
            _ => (-1.0, 1.0),
        }
    }

    /// A_n of the recurrence, n >= 1.
    pub fn rec_a(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        let nf = n as f64;
        match self.kind {
            FamilyKind::Legendre => (2.0 * nf - 1.0) / nf,
            FamilyKind::Jacobi { alpha, beta } => {
                let s = alpha + beta;
                if n == 1 {
                    (s + 2.0) / 2.0
                } else {
                    (2.0 * nf + s - 1.0) * (2.0 * nf + s) / (2.0 * nf * (nf + s))
                }
            }
            FamilyKind::Chebyshev => {
                if n == 1 {
                    1.0
                } else {
                    2.0
                }
            }
            FamilyKind::HermiteShiftScale { epsilon, .. } => 1.0 / epsilon,
        }
    }

    /// B_n of the recurrence, n >= 1.
    pub fn rec_b(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        let nf = n as f64;
        match self.kind {
            FamilyKind::Legendre | FamilyKind::Chebyshev => 0.0,
            FamilyKind::Jacobi { alpha, beta } => {
                let s = alpha + beta;
                if n == 1 {
                    (alpha - beta) / 2.0
                } else {
                    (2.0 * nf + s - 1.0) * (alpha * alpha - beta * beta)
                        / (2.0 * nf * (nf + s) * (2.0 * nf + s - 2.0))
                }
            }
            FamilyKind::HermiteShiftScale { center, epsilon } => -center / epsilon,
        }
    }

    /// C_n of the recurrence, n >= 2.
    pub fn rec_c(&self, n: usize) -> f64 {
        debug_assert!(n >= 2);
        let nf = n as f64;
        match self.kind {
            FamilyKind::Legendre => -(nf - 1.0) / nf,
            FamilyKind::Jacobi { alpha, beta } => {
                let s = alpha + beta;
                -(nf + alpha - 1.0) * (nf + beta - 1.0) * (2.0 * nf + s)
                    / (nf * (nf + s) * (2.0 * nf + s - 2.0))
            }
            FamilyKind::Chebyshev => -1.0,
            FamilyKind::HermiteShiftScale { .. } => -(nf - 1.0),
        }
    }

    /// Inner-product norm (p_n, p_n) over the family's full weight support.
    pub fn norm(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self.kind {
            FamilyKind::Legendre => 2.0 / (2.0 * nf + 1.0),
            FamilyKind::Jacobi { alpha, beta } => {
                let s = alpha + beta;
                // 2^(s+1) G(n+a+1) G(n+b+1) / ((2n+s+1) G(n+s+1) n!);
                // at n=0 the denominator pair is rewritten as G(s+2) so the
                // s+1 -> 0 limit stays finite
                let num = (s + 1.0) * std::f64::consts::LN_2
                    + ln_gamma(nf + alpha + 1.0)
                    + ln_gamma(nf + beta + 1.0);
                let den = if n == 0 {
                    ln_gamma(s + 2.0)
                } else {
                    (2.0 * nf + s + 1.0).ln() + ln_gamma(nf + s + 1.0) + ln_gamma(nf + 1.0)
                };
                (num - den).exp()
            }
            FamilyKind::Chebyshev => {
                if n == 0 {
                    std::f64::consts::PI
                } else {
                    std::f64::consts::PI / 2.0
                }
            }
            FamilyKind::HermiteShiftScale { epsilon, .. } => {
                let mut fact = 1.0;
                for k in 1..=n {
                    fact *= k as f64;
                }
                epsilon * (2.0 * std::f64::consts::PI).sqrt() * fact
            }
        }
    }

    /// Weight density at `t` (may be infinite at Chebyshev endpoints).
    pub fn weight(&self, t: f64) -> f64 {
        match self.kind {
            FamilyKind::Legendre => 1.0,
            FamilyKind::Jacobi { alpha, beta } => {
                (1.0 - t).powf(alpha) * (1.0 + t).powf(beta)
            }
            FamilyKind::Chebyshev => 1.0 / (1.0 - t * t).sqrt(),
            FamilyKind::HermiteShiftScale { center, epsilon } => {
                let z = (t - center) / epsilon;
                (-0.5 * z * z).exp()
            }
        }
    }

    /// Evaluate p_n(t) by running the recurrence.
    pub fn eval(&self, n: usize, t: f64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let mut prev = 1.0;
        let mut cur = self.rec_a(1) * t + self.rec_b(1);
        for k in 2..=n {
            let next = (self.rec_a(k) * t + self.rec_b(k)) * cur + self.rec_c(k) * prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    /// Taylor coefficients of the weight about the interval start, through
    /// degree `m`: `w(t) ~ sum_i w_i (t - a)^i`.
    ///
    /// Only weights that are smooth at the interval start qualify; callers
    /// are responsible for convergence of the series over the interval.
    pub fn weight_taylor(&self, m: usize) -> Result<Vec<f64>> {
        match self.kind {
            FamilyKind::Legendre => {
                let mut w = vec![0.0; m + 1];
                w[0] = 1.0;
                Ok(w)
            }
            FamilyKind::Jacobi { alpha, beta } => {
                // (1-t)^a (1+t)^b at t = -1: needs integer b >= 0, then
                // (2-u)^a u^b with u = t+1 expands binomially
                let bi = beta.round();
                if (beta - bi).abs() > 1e-9 || bi < 0.0 {
                    return Err(Error::Domain(format!(
                        "Jacobi weight with beta={beta} is not smooth at t=-1; \
                         Taylor expansion undefined"
                    )));
                }
                let b = bi as usize;
                let mut w = vec![0.0; m + 1];
                let scale = 2f64.powf(alpha);
                let mut binom = 1.0; // generalized binomial(alpha, i)
                for i in 0..=m.saturating_sub(b) {
                    if i > 0 {
                        binom *= (alpha - (i as f64 - 1.0)) / i as f64;
                    }
                    w[i + b] = scale * binom * (-0.5f64).powi(i as i32);
                }
                Ok(w)
            }
            FamilyKind::Chebyshev => Err(Error::Domain(
                "Chebyshev weight is singular at the interval endpoints; \
                 Taylor expansion undefined"
                    .into(),
            )),
            FamilyKind::HermiteShiftScale { center, epsilon } => {
                // g = exp(q(u)), q quadratic => (i+1) g_{i+1} = q1 g_i + 2 q2 g_{i-1}
                let a = self.interval().0;
                let c = a - center;
                let q1 = -c / (epsilon * epsilon);
                let q2 = -0.5 / (epsilon * epsilon);
                let mut w = vec![0.0; m + 1];
                w[0] = (-0.5 * c * c / (epsilon * epsilon)).exp();
                for i in 0..m {
                    let lower = if i >= 1 { 2.0 * q2 * w[i - 1] } else { 0.0 };
                    w[i + 1] = (q1 * w[i] + lower) / (i as f64 + 1.0);
                }
                Ok(w)
            }
        }
    }

    /// Short label for reports and CSV columns.
    pub fn label(&self) -> String {
        match self.kind {
            FamilyKind::Legendre => "legendre".into(),
            FamilyKind::Jacobi { alpha, beta } => format!("jacobi({alpha},{beta})"),
            FamilyKind::Chebyshev => "chebyshev".into(),
            FamilyKind::HermiteShiftScale { epsilon, .. } => {
                format!("hermite(eps={epsilon})")
            }
        }
    }
}

/// Natural log of the Gamma function, Lanczos approximation (g = 7, n = 9);
/// relative error below 1e-13 for positive arguments.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection formula
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
