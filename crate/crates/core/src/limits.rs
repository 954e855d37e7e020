//! Signature data, closed-form constants and the affine normalizations that
//! send extremal statistics to their Gumbel or Weibull limits.
//!
//! Every normalization acts on the `×N` Haar statistic `max_j Σ a_i (√N γ_ij)²`,
//! which has the same law as the Gaussian statistic `max_j Σ a_i y_ij²` in the
//! limit, so one `(scale, shift)` pair serves both sources.

use serde::{Deserialize, Serialize};

use crate::field::FieldKind;
use crate::quadratic::{ExtremalMode, Spectrum};
use crate::special::{ln_gamma_pos, normal_cdf};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignatureData {
    /// Largest value.
    pub a: f64,
    /// Multiplicity of `a`.
    pub m: usize,
    /// Largest absolute value.
    pub a_star: f64,
    pub m_plus: usize,
    pub m_minus: usize,
}

pub fn signature(spectrum: &Spectrum) -> SignatureData {
    let v = spectrum.values();
    let a = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let a_star = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let count = |target: f64| v.iter().filter(|&&x| x == target).count();
    SignatureData {
        a,
        m: count(a),
        a_star,
        m_plus: count(a_star),
        m_minus: count(-a_star),
    }
}

/// `log(Γ(m/2) · √Π_{a_j≠a}(1 − a_j/a))`.
pub fn c_m_constant(spectrum: &Spectrum) -> Result<f64> {
    let sig = signature(spectrum);
    if sig.a <= 0.0 {
        return Err(Error::domain(format!(
            "c_m needs a positive largest value, got a = {}",
            sig.a
        )));
    }
    Ok(ln_gamma_pos(sig.m as f64 / 2.0) + 0.5 * ln_product(spectrum, sig.a, |aj| 1.0 - aj / sig.a))
}

/// `Σ_{a_j ≠ skip} ln factor(a_j)`.
fn ln_product(spectrum: &Spectrum, skip: f64, factor: impl Fn(f64) -> f64) -> f64 {
    spectrum
        .values()
        .iter()
        .filter(|&&aj| aj != skip)
        .map(|&aj| factor(aj).ln())
        .sum()
}

/// Constant of the two-sided (`max |·|`) Gumbel normalization.
pub fn c_star_constant(spectrum: &Spectrum) -> f64 {
    let sig = signature(spectrum);
    let s = sig.a_star;
    let ln_p_plus = ln_product(spectrum, s, |aj| 1.0 - aj / s);
    let ln_p_minus = ln_product(spectrum, -s, |aj| 1.0 + aj / s);
    use std::cmp::Ordering::*;
    match sig.m_plus.cmp(&sig.m_minus) {
        Greater => ln_gamma_pos(sig.m_plus as f64 / 2.0) + 0.5 * ln_p_plus,
        Less => ln_gamma_pos(sig.m_minus as f64 / 2.0) + 0.5 * ln_p_minus,
        Equal => {
            let sum = (-0.5 * ln_p_plus).exp() + (-0.5 * ln_p_minus).exp();
            ln_gamma_pos(sig.m_plus as f64 / 2.0) - sum.ln()
        }
    }
}

/// `γ_k = ½ (2/(k Γ(k/2)))^{2/k}`.
pub fn gamma_k_constant(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("gamma_k needs k >= 1"));
    }
    let kf = k as f64;
    let ln_inner = std::f64::consts::LN_2 - kf.ln() - ln_gamma_pos(kf / 2.0);
    Ok(0.5 * (2.0 / kf * ln_inner).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitLaw {
    Gumbel,
    Weibull { shape: f64 },
    StandardNormal,
}

impl LimitLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        law_cdf(*self, x)
    }

    /// Inverse distribution function on `(0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            LimitLaw::Gumbel => -(-p.ln()).ln(),
            LimitLaw::Weibull { shape } => -(-p.ln()).powf(1.0 / shape),
            LimitLaw::StandardNormal => {
                // bisection is plenty for plotting and test fixtures
                let (mut lo, mut hi) = (-40.0, 40.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if normal_cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

pub fn law_cdf(law: LimitLaw, x: f64) -> f64 {
    match law {
        LimitLaw::Gumbel => (-(-x).exp()).exp(),
        LimitLaw::Weibull { shape } => {
            if x < 0.0 {
                (-(-x).powf(shape)).exp()
            } else {
                1.0
            }
        }
        LimitLaw::StandardNormal => normal_cdf(x),
    }
}

/// Scale of the statistic an affine normalization expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticConvention {
    /// `max_j Σ a_i (√N γ_ij)²`; also the Gaussian `max_j Σ a_i y_ij²`.
    HaarTimesN,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    /// Negative for `Min`, which is normalized as `−max(−A)`.
    pub scale: f64,
    pub shift: f64,
    pub law: LimitLaw,
    pub statistic_convention: StatisticConvention,
}

impl Normalization {
    pub fn apply(&self, s: f64) -> f64 {
        self.scale * s + self.shift
    }
}

fn check_dimension(n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::domain(format!("normalization needs N >= 3, got {n}")));
    }
    Ok(n as f64)
}

/// Fixed-rank normalization for a real field.
///
/// * `MaxSigned`, `a > 0`: Gumbel, `S/(2a) − log N + (1 − m/2) log log N + c_m`.
/// * `MaxSigned`, all values negative: Weibull(k/2),
///   `S · γ_k N^{2/k} / (Π|a_j|)^{1/k}`.
/// * `MaxAbs`: Gumbel with `a*`, `max(m₊, m₋)` and `c*`.
/// * `Min`: the `MaxSigned` normalization of `−A` composed with `S ↦ −S`.
pub fn normalization_fixed(spectrum: &Spectrum, n: u64, mode: ExtremalMode) -> Result<Normalization> {
    let nf = check_dimension(n)?;
    let (ln_n, lnln_n) = (nf.ln(), nf.ln().ln());
    let sig = signature(spectrum);
    let law_gumbel = |scale: f64, m: usize, c: f64| Normalization {
        scale,
        shift: -ln_n + (1.0 - m as f64 / 2.0) * lnln_n + c,
        law: LimitLaw::Gumbel,
        statistic_convention: StatisticConvention::HaarTimesN,
    };
    match mode {
        ExtremalMode::MaxSigned if sig.a > 0.0 => Ok(law_gumbel(1.0 / (2.0 * sig.a), sig.m, c_m_constant(spectrum)?)),
        ExtremalMode::MaxSigned => {
            let k = spectrum.k();
            let kf = k as f64;
            let ln_prod: f64 = spectrum.values().iter().map(|a| a.abs().ln()).sum();
            let scale = gamma_k_constant(k)? * (2.0 / kf * nf.ln() - ln_prod / kf).exp();
            Ok(Normalization {
                scale,
                shift: 0.0,
                law: LimitLaw::Weibull { shape: kf / 2.0 },
                statistic_convention: StatisticConvention::HaarTimesN,
            })
        }
        ExtremalMode::MaxAbs => Ok(law_gumbel(
            1.0 / (2.0 * sig.a_star),
            sig.m_plus.max(sig.m_minus),
            c_star_constant(spectrum),
        )),
        ExtremalMode::Min => {
            let inner = normalization_fixed(&spectrum.negated(), n, ExtremalMode::MaxSigned)?;
            Ok(Normalization {
                scale: -inner.scale,
                ..inner
            })
        }
    }
}

/// Spectrum with the same law in the real convention: a complex Gaussian
/// with `E|y|² = 1` contributes `a (g₁² + g₂²)/2`, so each `a` becomes two
/// copies of `a/2`.
pub fn real_equivalent_spectrum(spectrum: &Spectrum, field: FieldKind) -> Spectrum {
    match field {
        FieldKind::Real => spectrum.clone(),
        FieldKind::Complex => Spectrum::new(spectrum.values().iter().flat_map(|&a| [a / 2.0, a / 2.0]).collect())
            .expect("halving keeps values nonzero"),
    }
}

/// `normalization_fixed` for either field. The complex case reduces to the
/// real one through [`real_equivalent_spectrum`]; for rank one it gives
/// `S − log N`.
pub fn normalization_fixed_field(
    spectrum: &Spectrum,
    n: u64,
    mode: ExtremalMode,
    field: FieldKind,
) -> Result<Normalization> {
    normalization_fixed(&real_equivalent_spectrum(spectrum, field), n, mode)
}

/// `(p_N, q_N)` for the rank-`N^α` projection:
/// `p = N^{α/2}/√(log N)`,
/// `q = N^α + 2N^{α/2}(√(log N) − log(4π log N)/(4√(log N)))`.
pub fn diverging_sequences(n: u64, alpha: f64) -> Result<(f64, f64)> {
    let nf = check_dimension(n)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let l = nf.ln();
    let sl = l.sqrt();
    let half = nf.powf(alpha / 2.0);
    let p = half / sl;
    let q = nf.powf(alpha) + 2.0 * half * (sl - (4.0 * std::f64::consts::PI * l).ln() / (4.0 * sl));
    Ok((p, q))
}

/// The normalized diverging-rank statistic written out term by term:
/// `√L S/N^{α/2} − N^{α/2}√L − 2L + ½ log L + ½ log 4π` with `L = log N`.
pub fn diverging_expanded(n: u64, alpha: f64, s: f64) -> Result<f64> {
    diverging_sequences(n, alpha)?;
    let nf = n as f64;
    let l = nf.ln();
    let half = nf.powf(alpha / 2.0);
    Ok(l.sqrt() * s / half - half * l.sqrt() - 2.0 * l + 0.5 * l.ln() + 0.5 * (4.0 * std::f64::consts::PI).ln())
}

/// True when `|k − N^α| <= N^{α/2 − ε}`.
pub fn diverging_rank_admissible(n: u64, alpha: f64, k: usize, epsilon: f64) -> bool {
    let nf = n as f64;
    (k as f64 - nf.powf(alpha)).abs() <= nf.powf(alpha / 2.0 - epsilon)
}

/// `S ↦ (S − q_N)/p_N` with a Gumbel limit, for the rank-`k_N` projection.
pub fn normalization_diverging(n: u64, alpha: f64, k_n: usize) -> Result<Normalization> {
    let (p, q) = diverging_sequences(n, alpha)?;
    if !diverging_rank_admissible(n, alpha, k_n, 0.0) {
        log::warn!(
            "rank {k_n} is farther than N^(alpha/2) from N^alpha = {:.3}",
            (n as f64).powf(alpha)
        );
    }
    Ok(Normalization {
        scale: 1.0 / p,
        shift: -q / p,
        law: LimitLaw::Gumbel,
        statistic_convention: StatisticConvention::HaarTimesN,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn sp(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn signature_examples() {
        let s = signature(&sp(&[1.0, 1.0, -1.0]));
        assert_eq!((s.a, s.m, s.a_star, s.m_plus, s.m_minus), (1.0, 2, 1.0, 2, 1));
        let s = signature(&sp(&[-2.0, -3.0]));
        assert_eq!((s.a, s.m, s.a_star, s.m_plus, s.m_minus), (-2.0, 1, 3.0, 0, 1));
        let s = signature(&sp(&[5.0]));
        assert_eq!((s.a, s.m, s.a_star, s.m_plus, s.m_minus), (5.0, 1, 5.0, 1, 0));
    }

    // Reference values from 30-digit arithmetic.
    #[test]
    fn constants_spot_values() {
        assert_eq!(c_m_constant(&sp(&[2.5, 2.5])).unwrap(), 0.0);
        assert!(close(c_m_constant(&sp(&[1.0])).unwrap(), 0.57236494292470008707, 1e-12));
        assert!(close(
            c_m_constant(&sp(&[1.0, 0.5])).unwrap(),
            0.22579135264472743236,
            1e-12
        ));
        assert!(c_m_constant(&sp(&[-1.0, -2.0])).is_err());
        assert!(close(c_star_constant(&sp(&[1.0, -1.0])), 0.22579135264472743236, 1e-12));
        assert!(close(c_star_constant(&sp(&[1.0, -0.5])), 0.77509749697878227806, 1e-12));
        assert!(close(c_star_constant(&sp(&[-1.0, 0.5])), 0.77509749697878227806, 1e-12));
        assert!(close(gamma_k_constant(1).unwrap(), std::f64::consts::FRAC_2_PI, 1e-12));
        assert_eq!(gamma_k_constant(2).unwrap(), 0.5);
        assert!(close(gamma_k_constant(4).unwrap(), 0.3535533905932737622, 1e-12));
    }

    #[test]
    fn law_cdf_examples() {
        assert!((law_cdf(LimitLaw::Gumbel, 0.0) - (-1f64).exp()).abs() < 1e-16);
        assert!((law_cdf(LimitLaw::Weibull { shape: 0.5 }, -1.0) - (-1f64).exp()).abs() < 1e-16);
        assert_eq!(law_cdf(LimitLaw::Weibull { shape: 3.0 }, 0.5), 1.0);
        assert_eq!(law_cdf(LimitLaw::Gumbel, -800.0), 0.0);
        assert_eq!(law_cdf(LimitLaw::Gumbel, 800.0), 1.0);
        for law in [
            LimitLaw::Gumbel,
            LimitLaw::Weibull { shape: 1.5 },
            LimitLaw::StandardNormal,
        ] {
            for p in [0.01, 0.3, 0.9] {
                assert!((law.cdf(law.quantile(p)) - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_normalization_matches_classical_centering() {
        let n = 5000u64;
        let nf = n as f64;
        let norm = normalization_fixed(&sp(&[1.0]), n, ExtremalMode::MaxSigned).unwrap();
        assert_eq!(norm.scale, 0.5);
        let want = -nf.ln() + 0.5 * nf.ln().ln() + 0.5 * std::f64::consts::PI.ln();
        assert!((norm.shift - want).abs() < 1e-12);
        // 2·normalized = S − (2 log N − log log N − log π)
        for s in [5.0, 17.0, 30.0] {
            let lhs = 2.0 * norm.apply(s);
            let rhs = s - (2.0 * nf.ln() - nf.ln().ln() - std::f64::consts::PI.ln());
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_spectrum_is_chi_square_normalization() {
        let n = 1000u64;
        let nf = n as f64;
        for k in 1..6 {
            let a = 0.75;
            let norm = normalization_fixed(&Spectrum::new(vec![a; k]).unwrap(), n, ExtremalMode::MaxSigned).unwrap();
            let kf = k as f64;
            let want = -nf.ln() + (1.0 - kf / 2.0) * nf.ln().ln() + ln_gamma_pos(kf / 2.0);
            assert!((norm.shift - want).abs() < 1e-12);
            assert_eq!(norm.scale, 1.0 / (2.0 * a));
        }
        let three = normalization_fixed(&sp(&[2.0, 2.0, 2.0]), n, ExtremalMode::MaxSigned).unwrap();
        let want = -nf.ln() - 0.5 * nf.ln().ln() + (std::f64::consts::PI.sqrt() / 2.0).ln();
        assert!((three.shift - want).abs() < 1e-12);
    }

    #[test]
    fn weibull_normalization() {
        let n = 2000u64;
        let norm = normalization_fixed(&sp(&[-1.0, -1.0]), n, ExtremalMode::MaxSigned).unwrap();
        assert_eq!(norm.law, LimitLaw::Weibull { shape: 1.0 });
        assert!((norm.scale - 1000.0).abs() < 1e-9);
        assert_eq!(norm.shift, 0.0);
        let min = normalization_fixed(&sp(&[1.0, 1.0]), n, ExtremalMode::Min).unwrap();
        assert_eq!(min.scale, -norm.scale);
    }

    #[test]
    fn complex_reduction() {
        let n = 1000u64;
        let gue = normalization_fixed_field(&sp(&[1.0]), n, ExtremalMode::MaxSigned, FieldKind::Complex).unwrap();
        assert_eq!(gue.scale, 1.0);
        assert!((gue.shift + (n as f64).ln()).abs() < 1e-12);
        let w = normalization_fixed_field(&sp(&[-1.0]), n, ExtremalMode::MaxSigned, FieldKind::Complex).unwrap();
        assert!((w.scale - n as f64).abs() < 1e-9);
        assert_eq!(w.law, LimitLaw::Weibull { shape: 1.0 });
    }

    #[test]
    fn small_dimension_rejected() {
        assert!(normalization_fixed(&sp(&[1.0]), 2, ExtremalMode::MaxSigned).is_err());
        assert!(normalization_diverging(2, 0.3, 1).is_err());
        assert!(normalization_diverging(1000, 1.0, 1000).is_err());
        assert!(normalization_diverging(1000, 0.0, 1).is_err());
    }

    #[test]
    fn diverging_sequences_values() {
        let (p, q) = diverging_sequences(10_000, 0.4).unwrap();
        assert!((p - 2.07903672031965684).abs() < 1e-12, "{p}");
        assert!((q - 73.16887207980321309).abs() < 1e-11, "{q}");
        let norm = normalization_diverging(10_000, 0.4, 40).unwrap();
        assert!((norm.apply(q + p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diverging_expanded_form_agrees() {
        for n in [1_000u64, 1_000_000] {
            for alpha in [0.1, 0.3, 0.45, 0.8] {
                let norm = normalization_diverging(n, alpha, (n as f64).powf(alpha).round() as usize).unwrap();
                for s in [0.0, 10.0, 57.3, 400.0] {
                    let e = diverging_expanded(n, alpha, s).unwrap();
                    assert!(
                        (norm.apply(s) - e).abs() < 1e-9 * e.abs().max(1.0),
                        "N={n} a={alpha} s={s}"
                    );
                }
            }
        }
    }

    fn spectrum_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![0.1f64..10.0, -10.0f64..-0.1, Just(1.0), Just(-1.0)], 1..7)
    }

    proptest! {
        #[test]
        fn c_m_is_scale_invariant(v in spectrum_strategy(), e in -6i32..6) {
            let s = sp(&v);
            prop_assume!(signature(&s).a > 0.0);
            let c = 2f64.powi(e);
            prop_assert_eq!(c_m_constant(&s).unwrap(), c_m_constant(&s.scaled(c).unwrap()).unwrap());
        }

        #[test]
        fn c_star_is_sign_symmetric(v in spectrum_strategy()) {
            let s = sp(&v);
            prop_assert_eq!(c_star_constant(&s), c_star_constant(&s.negated()));
        }

        #[test]
        fn law_cdf_monotone(x in -50.0f64..50.0, dx in 0.0f64..5.0, shape in 0.1f64..10.0) {
            for law in [LimitLaw::Gumbel, LimitLaw::Weibull { shape }, LimitLaw::StandardNormal] {
                let (lo, hi) = (law_cdf(law, x), law_cdf(law, x + dx));
                prop_assert!(lo <= hi && (0.0..=1.0).contains(&lo) && hi <= 1.0);
            }
        }

        #[test]
        fn signature_invariants(v in spectrum_strategy()) {
            let s = signature(&sp(&v));
            prop_assert!(s.m >= 1 && s.m_plus + s.m_minus >= 1 && s.a <= s.a_star);
            if s.a > 0.0 && s.a == s.a_star {
                prop_assert_eq!(s.m, s.m_plus);
            }
        }
    }
}
