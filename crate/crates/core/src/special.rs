//! Special functions behind the exact finite-N laws: log-gamma, regularized
//! incomplete gamma, erfc, and the uniform Wimp estimate for `Γ(n, nt)/Γ(n)`.
//!
//! Every routine that can underflow also has a log-space variant; deep tails
//! (for example `Γ(400, 4000)/Γ(400)`) are compared in log space.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const LANCZOS_R: f64 = 10.900511;
const LANCZOS_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];
/// ln(2·√(e/π))
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const MAX_ITER: usize = 200_000;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma needs x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum in its accurate range.
        return ln_gamma_pos(x + 1.0) - x.ln();
    }
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let s = LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |s, (i, d)| s + d / (x + i as f64 - 1.0));
    s.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + LANCZOS_R) / std::f64::consts::E).ln()
}

/// Log of both regularized incomplete gammas, `(ln P(s,x), ln Q(s,x))`.
///
/// Series for `P` below `x = s + 1`, Lentz continued fraction for `Q` above.
pub fn ln_reg_gamma_pair(s: f64, x: f64) -> Result<(f64, f64)> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::arg(format!("incomplete gamma needs s > 0, got {s}")));
    }
    if !(x >= 0.0) {
        return Err(Error::arg(format!("incomplete gamma needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    if x.is_infinite() {
        return Ok((0.0, f64::NEG_INFINITY));
    }
    let ln_prefactor = s * x.ln() - x - ln_gamma_pos(s);
    if x < s + 1.0 {
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut converged = false;
        for n in 1..MAX_ITER {
            term *= x / (s + n as f64);
            sum += term;
            if term.abs() < sum.abs() * f64::EPSILON * 0.5 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::domain(format!(
                "incomplete gamma series did not converge (s={s}, x={x})"
            )));
        }
        let ln_p = ln_prefactor + sum.ln();
        Ok((ln_p, (-ln_p.exp()).ln_1p()))
    } else {
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut converged = false;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < f64::EPSILON {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::domain(format!(
                "incomplete gamma continued fraction did not converge (s={s}, x={x})"
            )));
        }
        let ln_q = ln_prefactor + h.ln();
        Ok(((-ln_q.exp()).ln_1p(), ln_q))
    }
}

/// `Q(s, x) = Γ(s, x)/Γ(s)`.
pub fn reg_gamma_upper(s: f64, x: f64) -> Result<f64> {
    ln_reg_gamma_pair(s, x).map(|(_, ln_q)| ln_q.exp())
}

/// `P(s, x) = γ(s, x)/Γ(s) = 1 − Q(s, x)`.
pub fn reg_gamma_lower(s: f64, x: f64) -> Result<f64> {
    ln_reg_gamma_pair(s, x).map(|(ln_p, _)| ln_p.exp())
}

pub fn ln_reg_gamma_upper(s: f64, x: f64) -> Result<f64> {
    ln_reg_gamma_pair(s, x).map(|(_, ln_q)| ln_q)
}

/// `exp(−x²)` with `x²` split so the exponent carries no rounding error.
fn exp_neg_sq(x: f64) -> f64 {
    let hi = (x * 4096.0).trunc() / 4096.0;
    let lo = x - hi;
    (-hi * hi).exp() * (-lo * (x + hi)).exp()
}

/// Scaled complementary error function `e^{x²} erfc(x)` for `x >= 2`.
fn erfcx_cf(x: f64) -> f64 {
    // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..MAX_ITER {
        let an = n as f64 * 0.5;
        d = x + an * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 0.5 * f64::EPSILON {
            break;
        }
    }
    FRAC_1_SQRT_PI / f
}

/// `erf(x)` for `0 <= x < 2` via the positive-term series
/// `2/√π e^{-x²} Σ 2ⁿ x^{2n+1}/(2n+1)!!`.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..500 {
        term *= 2.0 * x2 / (2 * n + 1) as f64;
        sum += term;
        if term < sum * f64::EPSILON * 0.25 {
            break;
        }
    }
    2.0 * FRAC_1_SQRT_PI * exp_neg_sq(x) * sum
}

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        1.0 - erf_series(x)
    } else if x > 27.3 {
        0.0
    } else {
        exp_neg_sq(x) * erfcx_cf(x)
    }
}

/// `e^{x²} erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x >= 2.0 {
        erfcx_cf(x)
    } else {
        erfc(x) * (x * x).exp()
    }
}

/// `ln erfc(x)`, finite far beyond the point where `erfc` underflows.
pub fn ln_erfc(x: f64) -> f64 {
    if x >= 2.0 {
        -x * x + erfcx_cf(x).ln()
    } else {
        erfc(x).ln()
    }
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `μ(t) = √(t − ln t − 1)` for `t >= 1`.
pub fn mu_of_t(t: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(Error::domain(format!("mu(t) needs t >= 1, got {t}")));
    }
    let d = t - 1.0;
    if d < 1e-4 {
        Ok(d * mu_ratio_series(d))
    } else {
        Ok((d - d.ln_1p()).sqrt())
    }
}

/// `μ(1+d)/d = √(1/2 − d/3 + d²/4 − d³/5 + …)`, small `d`.
fn mu_ratio_series(d: f64) -> f64 {
    let mut acc = 0.0;
    let mut pow = 1.0;
    for j in 2..10 {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * pow / j as f64;
        pow *= d;
    }
    acc.sqrt()
}

/// `μ(t)/(t − 1)`, with the limit `1/√2` at `t = 1`.
pub fn mu_ratio(t: f64) -> Result<f64> {
    let d = t - 1.0;
    if !(d >= 0.0) {
        return Err(Error::domain(format!("mu ratio needs t >= 1, got {t}")));
    }
    if d < 1e-8 {
        return Ok(std::f64::consts::FRAC_1_SQRT_2);
    }
    if d < 1e-4 {
        return Ok(mu_ratio_series(d));
    }
    Ok(mu_of_t(t)? / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WimpEvaluation {
    pub n: f64,
    pub t: f64,
    /// `(1/√2)(μ(t)/(t−1)) erfc(√n μ(t))`; may underflow to zero.
    pub approx: f64,
    /// `Γ(n, nt)/Γ(n)`; may underflow to zero.
    pub exact: f64,
    pub ln_approx: f64,
    pub ln_exact: f64,
    /// `|approx/exact − 1|`, evaluated from the logs.
    pub rel_error: f64,
}

/// Uniform asymptotic of the normalized upper incomplete gamma at `(n, nt)`
/// against the direct evaluation.
pub fn wimp_tail(n: f64, t: f64) -> Result<WimpEvaluation> {
    if !(n >= 1.0) || !(t >= 1.0) {
        return Err(Error::domain(format!(
            "wimp_tail needs n >= 1 and t >= 1 (n={n}, t={t})"
        )));
    }
    let ratio = mu_ratio(t)?;
    let mu = mu_of_t(t)?;
    let ln_approx = (ratio * std::f64::consts::FRAC_1_SQRT_2).ln() + ln_erfc(n.sqrt() * mu);
    let ln_exact = ln_reg_gamma_upper(n, n * t)?;
    Ok(WimpEvaluation {
        n,
        t,
        approx: ln_approx.exp(),
        exact: ln_exact.exp(),
        ln_approx,
        ln_exact,
        rel_error: (ln_approx - ln_exact).exp_m1().abs(),
    })
}

/// Exact law of `max` over `n_copies` i.i.d. copies of `a·χ²_k`:
/// `(1 − Q(k/2, x/(2a)))^N` for `x >= 0`, zero below.
pub fn exact_gaussian_max_cdf(n_copies: u64, k: usize, a: f64, x: f64) -> Result<f64> {
    if n_copies == 0 || k == 0 || !(a > 0.0) {
        return Err(Error::domain(format!(
            "exact max law needs N >= 1, k >= 1, a > 0 (N={n_copies}, k={k}, a={a})"
        )));
    }
    if x.is_nan() {
        return Err(Error::arg("x is NaN"));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let (ln_p, _) = ln_reg_gamma_pair(k as f64 / 2.0, x / (2.0 * a))?;
    Ok((n_copies as f64 * ln_p).exp())
}
