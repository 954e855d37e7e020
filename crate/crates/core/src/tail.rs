//! Tail oracles for `Σ a_i y_i²`: the angular function, the hyperspherical
//! ellipsoid identity by quadrature, Laplace-method tail asymptotics and a
//! brute-force Monte Carlo estimator.

use serde::{Deserialize, Serialize};

use crate::limits::{gamma_k_constant, signature};
use crate::quadratic::{ExtremalMode, Spectrum};
use crate::rng::RandomStream;
use crate::special::ln_gamma_pos;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailQuery {
    pub spectrum: Spectrum,
    pub t: f64,
    pub mode: ExtremalMode,
}

impl TailQuery {
    /// `MaxSigned`: `P(Σ ≥ t)`; `MaxAbs`: `P(|Σ| ≥ t)`; `Min`: `P(Σ ≤ t)`.
    pub fn new(spectrum: Spectrum, t: f64, mode: ExtremalMode) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::arg(format!("tail threshold must be finite and >= 0, got {t}")));
        }
        Ok(Self { spectrum, t, mode })
    }
}

/// Angles `(φ_1, …, φ_{k−1})` in `[0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularPoint {
    angles: Vec<f64>,
}

impl AngularPoint {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if let Some(bad) = angles.iter().find(|p| !(0.0..=std::f64::consts::PI).contains(*p)) {
            return Err(Error::arg(format!("angle {bad} outside [0, pi]")));
        }
        Ok(Self { angles })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// `a_1 cos²φ_1 + a_2 sin²φ_1 cos²φ_2 + … + a_k sin²φ_1⋯sin²φ_{k−1}`.
pub fn f_angular(spectrum: &Spectrum, point: &AngularPoint) -> Result<f64> {
    let a = spectrum.values();
    if point.angles.len() + 1 != a.len() {
        return Err(Error::arg(format!(
            "expected {} angles for k = {}, got {}",
            a.len() - 1,
            a.len(),
            point.angles.len()
        )));
    }
    let mut prefix = 1.0;
    let mut f = 0.0;
    for (ai, phi) in a.iter().zip(&point.angles) {
        let (s, c) = phi.sin_cos();
        f += ai * prefix * c * c;
        prefix *= s * s;
    }
    Ok(f + a[a.len() - 1] * prefix)
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Newton on the three-term
/// recurrence).
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=order {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Nodes per angle: 64 up to `k = 4`, 32 for `k ∈ {5, 6}`.
pub fn quadrature_order(k: usize) -> usize {
    if k <= 4 {
        64
    } else {
        32
    }
}

/// `(numeric, closed_form)` for
/// `∫_{[0,π]^{k−1}} f^{−k/2} Π_j sin^{k−1−j}φ_j dφ = π^{k/2} / (Γ(k/2) √Π a_j)`.
///
/// The integrand is symmetric under `φ_j ↦ π − φ_j`, so the rule runs on
/// `[0, π/2]^{k−1}` and is doubled per angle.
pub fn hyperspherical_identity_check(spectrum: &Spectrum) -> Result<(f64, f64)> {
    let a = spectrum.values();
    let k = a.len();
    if !spectrum.all_positive() {
        return Err(Error::domain("hyperspherical identity needs an all-positive spectrum"));
    }
    if k > 6 {
        return Err(Error::arg(format!("quadrature supports k <= 6, got {k}")));
    }
    let kf = k as f64;
    let closed =
        (0.5 * kf * std::f64::consts::PI.ln() - ln_gamma_pos(kf / 2.0) - 0.5 * a.iter().map(|v| v.ln()).sum::<f64>())
            .exp();
    if k == 1 {
        return Ok((a[0].powf(-0.5), closed));
    }
    let (x, w) = gauss_legendre(quadrature_order(k));
    let half_pi = std::f64::consts::FRAC_PI_2;
    // per level: (cos², sin², weight · sin^{exponent})
    let levels: Vec<Vec<(f64, f64, f64)>> = (0..k - 1)
        .map(|j| {
            let exponent = (k - 2 - j) as i32;
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| {
                    let phi = half_pi * 0.5 * (xi + 1.0);
                    let (s, c) = phi.sin_cos();
                    (c * c, s * s, 2.0 * half_pi * 0.5 * wi * s.powi(exponent))
                })
                .collect()
        })
        .collect();
    fn recurse(
        a: &[f64],
        levels: &[Vec<(f64, f64, f64)>],
        depth: usize,
        prefix: f64,
        f: f64,
        weight: f64,
        power: f64,
    ) -> f64 {
        if depth == levels.len() {
            let total = f + a[depth] * prefix;
            return weight * total.powf(power);
        }
        levels[depth]
            .iter()
            .map(|&(c2, s2, wj)| {
                recurse(
                    a,
                    levels,
                    depth + 1,
                    prefix * s2,
                    f + a[depth] * prefix * c2,
                    weight * wj,
                    power,
                )
            })
            .sum()
    }
    let numeric = recurse(a, &levels, 0, 1.0, 0.0, 1.0, -kf / 2.0);
    Ok((numeric, closed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailAsymptotic {
    pub value: f64,
    /// Leading term exceeded one and was clipped; `t` is too small.
    pub clipped: bool,
}

/// Leading Laplace term of `ln P(Σ a_i y_i² ≥ t)` for a spectrum with a
/// positive top value:
/// `2^{1−m/2}/Γ(m/2) · a^{1+k/2−m}/√Π_{a_j≠a}(a−a_j) · t^{m/2−1} e^{−t/(2a)}`.
fn ln_upper_tail(spectrum: &Spectrum, t: f64) -> f64 {
    let sig = signature(spectrum);
    let (a, m, k) = (sig.a, sig.m as f64, spectrum.k() as f64);
    let ln_prod: f64 = spectrum
        .values()
        .iter()
        .filter(|&&aj| aj != a)
        .map(|&aj| (a - aj).ln())
        .sum();
    (1.0 - m / 2.0) * std::f64::consts::LN_2 - ln_gamma_pos(m / 2.0) + (1.0 + k / 2.0 - m) * a.ln() - 0.5 * ln_prod
        + (m / 2.0 - 1.0) * t.ln()
        - t / (2.0 * a)
}

/// Leading-order tail. `MaxAbs` adds the upper tails of `A` and `−A`;
/// `Min` is the small-ball law `P(Σ ≤ t) ~ γ_k^{k/2} t^{k/2} / √Π a_j` for an
/// all-positive spectrum.
pub fn tail_asymptotic(query: &TailQuery) -> Result<TailAsymptotic> {
    let t = query.t;
    if !(t > 0.0) {
        return Err(Error::domain("tail asymptotics need t > 0"));
    }
    let s = &query.spectrum;
    let value = match query.mode {
        ExtremalMode::MaxSigned => {
            if signature(s).a <= 0.0 {
                return Err(Error::domain(
                    "upper tail of an all-negative spectrum vanishes for t > 0",
                ));
            }
            ln_upper_tail(s, t).exp()
        }
        ExtremalMode::MaxAbs => {
            let neg = s.negated();
            [s, &neg]
                .iter()
                .filter(|sp| signature(sp).a > 0.0)
                .map(|sp| ln_upper_tail(sp, t).exp())
                .sum()
        }
        ExtremalMode::Min => {
            if !s.all_positive() {
                return Err(Error::domain("small-ball asymptotics need an all-positive spectrum"));
            }
            let k = s.k();
            let kf = k as f64;
            let ln_prod: f64 = s.values().iter().map(|v| v.ln()).sum();
            (0.5 * kf * gamma_k_constant(k)?.ln() + 0.5 * kf * t.ln() - 0.5 * ln_prod).exp()
        }
    };
    if value > 1.0 {
        log::warn!("leading tail term {value:.3} exceeds one at t = {t}; clipped");
        return Ok(TailAsymptotic {
            value: 1.0,
            clipped: true,
        });
    }
    Ok(TailAsymptotic { value, clipped: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub estimate: f64,
    /// Binomial standard error `√(p(1−p)/samples)`.
    pub stderr: f64,
    pub hits: u64,
    pub samples: u64,
}

/// Frequency of the query event over i.i.d. real Gaussian vectors.
pub fn tail_mc(query: &TailQuery, samples: u64, stream: &mut RandomStream) -> Result<TailEstimate> {
    if samples < 1000 {
        return Err(Error::arg(format!(
            "tail_mc needs at least 1000 samples, got {samples}"
        )));
    }
    let a = query.spectrum.values();
    let t = query.t;
    let mut hits = 0u64;
    for _ in 0..samples {
        let s: f64 = a
            .iter()
            .map(|ai| {
                let y = stream.next_gaussian();
                ai * y * y
            })
            .sum();
        let hit = match query.mode {
            ExtremalMode::MaxSigned => s >= t,
            ExtremalMode::MaxAbs => s.abs() >= t,
            ExtremalMode::Min => s <= t,
        };
        hits += hit as u64;
    }
    let p = hits as f64 / samples as f64;
    Ok(TailEstimate {
        estimate: p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        hits,
        samples,
    })
}
