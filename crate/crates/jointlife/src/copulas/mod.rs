//! Bivariate copulas in survival orientation.
//!
//! Throughout this module a copula couples the *survival* scales of two
//! lifetimes: the point `(0, 0)` is the long-lives corner, and the joint
//! survival of a couple is `P(T₁ > s, T₂ > t) = C(S₁(s), S₂(t))`.
//! Pseudo-observations are built the same way: the longest-lived member of
//! a sample gets the rank closest to 0.
//!
//! Supported families: independence, comonotone, Clayton, Gumbel, Frank,
//! Gaussian, the raw empirical copula, and a probit-space kernel smoothing
//! of the empirical copula. Parametric families are fitted by maximum
//! pseudo-likelihood over a bracketed parameter range; a maximum pinned to
//! the range boundary is flagged so callers can refuse to trust it.

use crate::error::{Error, Result};
use crate::normal::{norm_cdf, norm_pdf, norm_quantile};
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

pub mod bvn;
use bvn::bvn_cdf;

/// Treat |theta| below this as exact independence for Frank, and theta
/// below it as independence for Clayton.
const THETA_EPS: f64 = 1e-8;

/// Convert paired observations to pseudo-observations on the survival
/// scale: `û = 1 - R/(n+1)` where `R` is the ascending average rank, so
/// larger values (longer lives) map toward 0. Ties share their average
/// rank.
pub fn pseudo_observations(xs: &[f64], ys: &[f64]) -> Result<Vec<(f64, f64)>> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "paired samples differ in length: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least 2 pairs for pseudo-observations".into(),
        ));
    }
    let ru = survival_ranks(xs)?;
    let rv = survival_ranks(ys)?;
    Ok(ru.into_iter().zip(rv).collect())
}

/// `1 - R/(n+1)` with average ranks.
fn survival_ranks(xs: &[f64]) -> Result<Vec<f64>> {
    let n = xs.len();
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in sample".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // Positions i..=j are tied; ascending ranks are 1-based.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = 1.0 - avg / (n as f64 + 1.0);
        }
        i = j + 1;
    }
    Ok(ranks)
}

/// Copula family tag, used for selection in fitting and configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaFamily {
    Independent,
    Comonotone,
    Clayton,
    Gumbel,
    Frank,
    Gaussian,
    Empirical,
    SmoothedEmpirical,
}

impl std::str::FromStr for CopulaFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "independent" | "independence" => Ok(CopulaFamily::Independent),
            "comonotone" | "comonotonic" => Ok(CopulaFamily::Comonotone),
            "clayton" => Ok(CopulaFamily::Clayton),
            "gumbel" => Ok(CopulaFamily::Gumbel),
            "frank" => Ok(CopulaFamily::Frank),
            "gaussian" | "normal" => Ok(CopulaFamily::Gaussian),
            "empirical" => Ok(CopulaFamily::Empirical),
            "smoothed_empirical" | "smoothed" => Ok(CopulaFamily::SmoothedEmpirical),
            other => Err(Error::InvalidInput(format!("unknown copula {other:?}"))),
        }
    }
}

impl std::fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CopulaFamily::Independent => "independent",
            CopulaFamily::Comonotone => "comonotone",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Frank => "frank",
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::Empirical => "empirical",
            CopulaFamily::SmoothedEmpirical => "smoothed_empirical",
        })
    }
}

/// A bivariate copula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Copula {
    Independent,
    Comonotone,
    /// Clayton with `theta >= 0`; 0 is independence. Survival-scale lower
    /// tail dependence, i.e. long lives cluster.
    Clayton { theta: f64 },
    /// Gumbel with `theta >= 1`; 1 is independence.
    Gumbel { theta: f64 },
    /// Frank with any real `theta`; 0 is independence, negative values give
    /// negative dependence.
    Frank { theta: f64 },
    /// Gaussian with correlation `rho` in (-1, 1).
    Gaussian { rho: f64 },
    /// Step-function empirical copula over stored pseudo-observations.
    Empirical { points: Vec<(f64, f64)> },
    /// Kernel-smoothed empirical copula: each pseudo-observation becomes a
    /// Gaussian kernel in probit space, and the smoothed distribution is
    /// re-margined through its own kernel margins, so the result is an
    /// exact copula (uniform margins, Fréchet bounds respected).
    SmoothedEmpirical {
        /// Probit-transformed pseudo-observations.
        probits: Vec<(f64, f64)>,
        /// Per-coordinate kernel bandwidths.
        bandwidth: (f64, f64),
    },
}

impl Copula {
    pub fn family(&self) -> CopulaFamily {
        match self {
            Copula::Independent => CopulaFamily::Independent,
            Copula::Comonotone => CopulaFamily::Comonotone,
            Copula::Clayton { .. } => CopulaFamily::Clayton,
            Copula::Gumbel { .. } => CopulaFamily::Gumbel,
            Copula::Frank { .. } => CopulaFamily::Frank,
            Copula::Gaussian { .. } => CopulaFamily::Gaussian,
            Copula::Empirical { .. } => CopulaFamily::Empirical,
            Copula::SmoothedEmpirical { .. } => CopulaFamily::SmoothedEmpirical,
        }
    }

    /// Dependence parameter of a parametric copula (θ, or ρ for the
    /// Gaussian); `None` for the parameter-free and empirical families.
    pub fn theta(&self) -> Option<f64> {
        match *self {
            Copula::Clayton { theta } | Copula::Gumbel { theta } | Copula::Frank { theta } => {
                Some(theta)
            }
            Copula::Gaussian { rho } => Some(rho),
            _ => None,
        }
    }

    /// Build a parametric copula from its family and parameter, checking
    /// the admissible range.
    pub fn parametric(family: CopulaFamily, theta: f64) -> Result<Copula> {
        match family {
            CopulaFamily::Independent => Ok(Copula::Independent),
            CopulaFamily::Comonotone => Ok(Copula::Comonotone),
            CopulaFamily::Clayton => {
                if theta.is_finite() && theta >= 0.0 {
                    Ok(Copula::Clayton { theta })
                } else {
                    Err(Error::Domain(format!(
                        "Clayton theta must be >= 0, got {theta}"
                    )))
                }
            }
            CopulaFamily::Gumbel => {
                if theta.is_finite() && theta >= 1.0 {
                    Ok(Copula::Gumbel { theta })
                } else {
                    Err(Error::Domain(format!(
                        "Gumbel theta must be >= 1, got {theta}"
                    )))
                }
            }
            CopulaFamily::Frank => {
                if theta.is_finite() {
                    Ok(Copula::Frank { theta })
                } else {
                    Err(Error::Domain("Frank theta must be finite".into()))
                }
            }
            CopulaFamily::Gaussian => {
                if theta.is_finite() && theta.abs() < 1.0 {
                    Ok(Copula::Gaussian { rho: theta })
                } else {
                    Err(Error::Domain(format!(
                        "Gaussian rho must lie in (-1, 1), got {theta}"
                    )))
                }
            }
            CopulaFamily::Empirical | CopulaFamily::SmoothedEmpirical => Err(Error::InvalidInput(
                "empirical copulas are built from data, not a parameter".into(),
            )),
        }
    }

    /// Empirical copula over pseudo-observations.
    pub fn empirical(points: Vec<(f64, f64)>) -> Result<Copula> {
        check_unit_square(&points)?;
        Ok(Copula::Empirical { points })
    }

    /// Probit-space Gaussian kernel smoothing of the empirical copula,
    /// with Silverman's rule `h = 1.06·σ̂·n^{-1/5}` applied per probit
    /// margin.
    pub fn smoothed_empirical(points: &[(f64, f64)]) -> Result<Copula> {
        check_unit_square(points)?;
        if points.len() < 5 {
            return Err(Error::InvalidInput(
                "kernel smoothing needs at least 5 pseudo-observations".into(),
            ));
        }
        let probits: Vec<(f64, f64)> = points
            .iter()
            .map(|&(u, v)| (norm_quantile(u), norm_quantile(v)))
            .collect();
        let n = probits.len() as f64;
        let sd = |take: fn(&(f64, f64)) -> f64| -> f64 {
            let mean = probits.iter().map(&take).sum::<f64>() / n;
            (probits.iter().map(|p| (take(p) - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        let h = |sigma: f64| (1.06 * sigma * n.powf(-0.2)).max(1e-3);
        let bandwidth = (h(sd(|p| p.0)), h(sd(|p| p.1)));
        Ok(Copula::SmoothedEmpirical { probits, bandwidth })
    }

    /// Copula CDF `C(u, v)`.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v));
        let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
        // Grounded and marginal edges hold for every copula; handling them
        // here keeps log/power formulas away from 0 and 1.
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        match *self {
            Copula::Independent => u * v,
            Copula::Comonotone => u.min(v),
            Copula::Clayton { theta } => {
                if theta < THETA_EPS {
                    u * v
                } else if u == 1.0 {
                    v
                } else if v == 1.0 {
                    u
                } else {
                    (u.powf(-theta) + v.powf(-theta) - 1.0).powf(-1.0 / theta)
                }
            }
            Copula::Gumbel { theta } => {
                if u == 1.0 {
                    v
                } else if v == 1.0 {
                    u
                } else {
                    let s = (-u.ln()).powf(theta) + (-v.ln()).powf(theta);
                    (-s.powf(1.0 / theta)).exp()
                }
            }
            Copula::Frank { theta } => {
                if theta.abs() < THETA_EPS {
                    u * v
                } else if u == 1.0 {
                    v
                } else if v == 1.0 {
                    u
                } else {
                    // 1 + Gu·Gv/G = D/A, so C = -(ln|D| - ln|A|)/θ.
                    let log_abs_a = (-theta).exp_m1().abs().ln();
                    -(frank_log_abs_d(theta, u, v) - log_abs_a) / theta
                }
            }
            Copula::Gaussian { rho } => bvn_cdf(norm_quantile(u), norm_quantile(v), rho),
            Copula::Empirical { ref points } => {
                let hits = points.iter().filter(|&&(a, b)| a <= u && b <= v).count();
                hits as f64 / points.len() as f64
            }
            Copula::SmoothedEmpirical {
                ref probits,
                bandwidth: (h1, h2),
            } => {
                // The kernel mixture is a genuine joint CDF in probit space
                // but its margins are the kernel margins, not Φ; evaluating
                // at the margin quantiles re-margins it to exact uniforms.
                if u == 1.0 {
                    return v;
                }
                if v == 1.0 {
                    return u;
                }
                let zs: Vec<f64> = probits.iter().map(|p| p.0).collect();
                let ws: Vec<f64> = probits.iter().map(|p| p.1).collect();
                let ones = vec![1.0; probits.len()];
                let z = kernel_mix_quantile(&zs, &ones, h1, u);
                let w = kernel_mix_quantile(&ws, &ones, h2, v);
                probits
                    .iter()
                    .map(|&(zi, wi)| norm_cdf((z - zi) / h1) * norm_cdf((w - wi) / h2))
                    .sum::<f64>()
                    / probits.len() as f64
            }
        }
    }

    /// Natural log of the copula density at an interior point.
    ///
    /// Errors for the comonotone copula (singular) and the raw empirical
    /// copula (discrete).
    pub fn log_density(&self, u: f64, v: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!(
                "density needs an interior point, got ({u}, {v})"
            )));
        }
        match *self {
            Copula::Independent => Ok(0.0),
            Copula::Comonotone => Err(Error::Domain(
                "the comonotone copula is singular and has no density".into(),
            )),
            Copula::Empirical { .. } => Err(Error::Domain(
                "the raw empirical copula is discrete and has no density".into(),
            )),
            Copula::Clayton { theta } => {
                if theta < THETA_EPS {
                    return Ok(0.0);
                }
                // ln(u^-θ + v^-θ - 1) without overflow: both exponents are
                // positive, so factor out the larger.
                let a = -theta * u.ln();
                let b = -theta * v.ln();
                let m = a.max(b);
                let log_sum = m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln();
                Ok((1.0 + theta).ln() - (1.0 + theta) * (u.ln() + v.ln())
                    - (2.0 + 1.0 / theta) * log_sum)
            }
            Copula::Gumbel { theta } => {
                if theta < 1.0 + THETA_EPS {
                    return Ok(0.0);
                }
                let ut = -u.ln();
                let vt = -v.ln();
                let s = ut.powf(theta) + vt.powf(theta);
                let t = s.powf(1.0 / theta);
                Ok(-t + (theta - 1.0) * (ut.ln() + vt.ln()) - (u.ln() + v.ln())
                    + (2.0 / theta - 2.0) * s.ln()
                    + (1.0 + (theta - 1.0) / t).ln())
            }
            Copula::Frank { theta } => {
                if theta.abs() < THETA_EPS {
                    return Ok(0.0);
                }
                // c = θ·A·e^{-θ(u+v)} / D² with A = 1 - e^{-θ} and
                // D = A - Au·Av; θ·A > 0 for either sign of θ.
                let a = -(-theta).exp_m1();
                Ok((theta * a).ln() - theta * (u + v) - 2.0 * frank_log_abs_d(theta, u, v))
            }
            Copula::Gaussian { rho } => {
                let z = norm_quantile(u);
                let w = norm_quantile(v);
                let r2 = 1.0 - rho * rho;
                Ok(-0.5 * r2.ln() - (rho * rho * (z * z + w * w) - 2.0 * rho * z * w) / (2.0 * r2))
            }
            Copula::SmoothedEmpirical {
                ref probits,
                bandwidth: (h1, h2),
            } => {
                let zs: Vec<f64> = probits.iter().map(|p| p.0).collect();
                let ws: Vec<f64> = probits.iter().map(|p| p.1).collect();
                let ones = vec![1.0; probits.len()];
                let z = kernel_mix_quantile(&zs, &ones, h1, u);
                let w = kernel_mix_quantile(&ws, &ones, h2, v);
                // log of (1/n)Σ φ((z-zi)/h1)/h1 · φ((w-wi)/h2)/h2 via
                // log-sum-exp over the kernels, divided by the kernel
                // margin densities at the same point (Sklar's theorem).
                let logs: Vec<f64> = probits
                    .iter()
                    .map(|&(zi, wi)| {
                        let dz = (z - zi) / h1;
                        let dw = (w - wi) / h2;
                        -0.5 * (dz * dz + dw * dw)
                    })
                    .collect();
                let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
                let log_f = lse
                    - (probits.len() as f64).ln()
                    - (2.0 * std::f64::consts::PI * h1 * h2).ln();
                Ok(log_f
                    - kernel_mix_log_density(&zs, h1, z)
                    - kernel_mix_log_density(&ws, h2, w))
            }
        }
    }

    /// Copula density `c(u, v)`.
    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        self.log_density(u, v).map(f64::exp)
    }

    /// Draw `v` from the conditional distribution of `V` given `U = u`, by
    /// inverting the conditional CDF `h(v|u) = ∂C/∂u` at the uniform `w`.
    pub fn conditional_sample(&self, u: f64, w: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) || !(w > 0.0 && w < 1.0) {
            return Err(Error::Domain(format!(
                "conditional sampling needs interior u and w, got ({u}, {w})"
            )));
        }
        match *self {
            Copula::Independent => Ok(w),
            Copula::Comonotone => Ok(u),
            Copula::Clayton { theta } => {
                if theta < THETA_EPS {
                    return Ok(w);
                }
                let t = (w.powf(-theta / (1.0 + theta)) - 1.0) * u.powf(-theta) + 1.0;
                Ok(t.powf(-1.0 / theta))
            }
            Copula::Frank { theta } => {
                if theta.abs() < THETA_EPS {
                    return Ok(w);
                }
                // v = -(1/θ)·ln[(w·e^{-θ} + (1-w)·e^{-θu}) /
                //              (w        + (1-w)·e^{-θu})],
                // assembled in log space so large θ·u cannot round the
                // numerator to zero.
                let lse = |p: f64, q: f64| {
                    let m = p.max(q);
                    m + ((p - m).exp() + (q - m).exp()).ln()
                };
                let lw = w.ln();
                let l1w = (1.0 - w).ln();
                let num = lse(lw - theta, l1w - theta * u);
                let den = lse(lw, l1w - theta * u);
                Ok(((den - num) / theta).clamp(0.0, 1.0))
            }
            Copula::Gaussian { rho } => {
                let z = norm_quantile(u);
                let q = norm_quantile(w);
                Ok(norm_cdf(rho * z + (1.0 - rho * rho).sqrt() * q))
            }
            Copula::Gumbel { .. } => self.invert_conditional_by_bisection(u, w),
            Copula::SmoothedEmpirical {
                ref probits,
                bandwidth: (h1, h2),
            } => {
                // Condition in probit space: weight each kernel by its
                // density at the u-quantile slice, invert the weighted
                // w-mixture at the target, then map back through the
                // smoothed margin.
                let zs: Vec<f64> = probits.iter().map(|p| p.0).collect();
                let ws: Vec<f64> = probits.iter().map(|p| p.1).collect();
                let ones = vec![1.0; probits.len()];
                let z = kernel_mix_quantile(&zs, &ones, h1, u);
                let logs: Vec<f64> = zs.iter().map(|&zi| -0.5 * ((z - zi) / h1).powi(2)).collect();
                let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let weights: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
                let wq = kernel_mix_quantile(&ws, &weights, h2, w);
                Ok(kernel_mix_cdf(&ws, &ones, h2, wq))
            }
            Copula::Empirical { .. } => Err(Error::Domain(
                "the raw empirical copula has no continuous conditional; smooth it first".into(),
            )),
        }
    }

    /// Conditional CDF `h(v|u) = ∂C(u, v)/∂u` where a direct form exists.
    fn conditional_cdf(&self, u: f64, v: f64) -> f64 {
        match *self {
            Copula::Gumbel { theta } => {
                if v <= 0.0 {
                    return 0.0;
                }
                if v >= 1.0 {
                    return 1.0;
                }
                let ut = -u.ln();
                let vt = -v.ln();
                let s = ut.powf(theta) + vt.powf(theta);
                let c = (-s.powf(1.0 / theta)).exp();
                c * s.powf(1.0 / theta - 1.0) * ut.powf(theta - 1.0) / u
            }
            Copula::SmoothedEmpirical {
                ref probits,
                bandwidth: (h1, h2),
            } => {
                if v <= 0.0 {
                    return 0.0;
                }
                if v >= 1.0 {
                    return 1.0;
                }
                let zs: Vec<f64> = probits.iter().map(|p| p.0).collect();
                let ws: Vec<f64> = probits.iter().map(|p| p.1).collect();
                let ones = vec![1.0; probits.len()];
                let z = kernel_mix_quantile(&zs, &ones, h1, u);
                let w = kernel_mix_quantile(&ws, &ones, h2, v);
                // Kernel weights in log space so far-out z still works.
                let logs: Vec<f64> = zs.iter().map(|&zi| -0.5 * ((z - zi) / h1).powi(2)).collect();
                let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut num = 0.0;
                let mut den = 0.0;
                for (l, &wi) in logs.iter().zip(&ws) {
                    let weight = (l - m).exp();
                    num += weight * norm_cdf((w - wi) / h2);
                    den += weight;
                }
                num / den
            }
            _ => unreachable!("bisection is only used for the Gumbel conditional"),
        }
    }

    fn invert_conditional_by_bisection(&self, u: f64, w: f64) -> Result<f64> {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        // h(v|u) is a CDF in v: increasing from 0 to 1, so plain bisection
        // converges unconditionally; 80 halvings reach ~6e-25.
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.conditional_cdf(u, mid) < w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Draw `n` pairs from the copula. Pairs are on the survival scale, so
    /// feeding them through inverse survival functions yields lifetimes.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<(f64, f64)>> {
        if let Copula::Empirical { points } = self {
            // Resample stored pseudo-observations.
            return Ok((0..n)
                .map(|_| points[rng.random_range(0..points.len())])
                .collect());
        }
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let u = interior_uniform(rng);
            let w = interior_uniform(rng);
            out.push((u, self.conditional_sample(u, w)?));
        }
        Ok(out)
    }
}

/// `ln|D|` for Frank's common denominator `D = A - Au·Av` with
/// `Ax = 1 - e^{-θx}`. Expanding,
/// `D = e^{-θu}(1 - e^{-θv}) + e^{-θv}(1 - e^{-θ(1-v)})`,
/// a two-term sum whose pieces share a sign (both flip together when
/// θ < 0), so a log-sum-exp never cancels — unlike the direct form, which
/// rounds to zero once θ·min(u, v) outruns the f64 mantissa.
fn frank_log_abs_d(theta: f64, u: f64, v: f64) -> f64 {
    let (t1, t2) = if theta > 0.0 {
        (
            -theta * u + (-(-theta * v).exp_m1()).ln(),
            -theta * v + (-(-theta * (1.0 - v)).exp_m1()).ln(),
        )
    } else {
        let s = -theta;
        (
            s * u + (s * v).exp_m1().ln(),
            s * v + (s * (1.0 - v)).exp_m1().ln(),
        )
    };
    let m = t1.max(t2);
    m + ((t1 - m).exp() + (t2 - m).exp()).ln()
}

/// CDF of a weighted Gaussian kernel mixture `Σ wᵢ·Φ((z - cᵢ)/h) / Σ wᵢ`.
/// The smoothed copula's margins and conditional slices all take this form.
fn kernel_mix_cdf(centers: &[f64], weights: &[f64], h: f64, z: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&c, &w) in centers.iter().zip(weights) {
        num += w * norm_cdf((z - c) / h);
        den += w;
    }
    num / den
}

/// Log-density of the kernel mixture `(1/n)·Σ φ((z - cᵢ)/h)/h`, assembled
/// with a log-sum-exp so lone far-out kernels do not underflow.
fn kernel_mix_log_density(centers: &[f64], h: f64, z: f64) -> f64 {
    let logs: Vec<f64> = centers
        .iter()
        .map(|&c| -0.5 * ((z - c) / h).powi(2))
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
        - (centers.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt()).ln()
}

/// Inverse of `kernel_mix_cdf` in `z`: Newton steps with a bisection
/// safeguard. The mixture CDF is smooth and strictly increasing, so the
/// bracket only ever tightens and the iteration cannot stall.
fn kernel_mix_quantile(centers: &[f64], weights: &[f64], h: f64, p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let den: f64 = weights.iter().sum();
    let (mut lo, mut hi) = centers
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
            (lo.min(c), hi.max(c))
        });
    lo -= 40.0 * h + 1.0;
    hi += 40.0 * h + 1.0;
    let mut z = norm_quantile(p).clamp(lo, hi);
    for _ in 0..200 {
        let mut f = 0.0;
        let mut fp = 0.0;
        for (&c, &w) in centers.iter().zip(weights) {
            let t = (z - c) / h;
            f += w * norm_cdf(t);
            fp += w * norm_pdf(t) / h;
        }
        f = f / den - p;
        fp /= den;
        if f > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let newton = z - f / fp;
        let next = if fp > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - z).abs() <= 1e-14 * (1.0 + next.abs()) {
            return next;
        }
        z = next;
    }
    z
}

/// Uniform draw strictly inside (0, 1).
fn interior_uniform(rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

fn check_unit_square(points: &[(f64, f64)]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no pseudo-observations".into()));
    }
    for &(u, v) in points {
        if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
            return Err(Error::InvalidInput(format!(
                "pseudo-observation ({u}, {v}) outside the open unit square"
            )));
        }
    }
    Ok(())
}

// ===== Fitting =====

/// Result of a maximum pseudo-likelihood fit.
#[derive(Debug, Clone, Serialize)]
pub struct CopulaFit {
    pub copula: Copula,
    /// Total log pseudo-likelihood at the optimum.
    pub log_likelihood: f64,
    /// The optimum sits on the admissible boundary of the family, meaning
    /// the family cannot represent the dependence in this data (for
    /// example Clayton or Gumbel facing negative dependence).
    pub at_boundary: bool,
}

/// Parameter brackets searched per family.
fn family_bracket(family: CopulaFamily) -> Option<(f64, f64)> {
    match family {
        CopulaFamily::Clayton => Some((0.0, 30.0)),
        CopulaFamily::Gumbel => Some((1.0, 30.0)),
        CopulaFamily::Frank => Some((-50.0, 50.0)),
        CopulaFamily::Gaussian => Some((-0.999, 0.999)),
        _ => None,
    }
}

/// Fit a copula family to pseudo-observations by maximum pseudo-likelihood.
///
/// Parametric families are searched over their bracket with a coarse grid
/// followed by golden-section refinement. Empirical families are simply
/// constructed. The comonotone copula has no density and cannot be fitted.
pub fn fit(family: CopulaFamily, pseudo: &[(f64, f64)]) -> Result<CopulaFit> {
    check_unit_square(pseudo)?;
    if pseudo.len() < 10 {
        return Err(Error::InvalidInput(format!(
            "copula fitting needs at least 10 pairs, got {}",
            pseudo.len()
        )));
    }
    match family {
        CopulaFamily::Independent => Ok(CopulaFit {
            copula: Copula::Independent,
            log_likelihood: 0.0,
            at_boundary: false,
        }),
        CopulaFamily::Comonotone => Err(Error::InvalidInput(
            "the comonotone copula has no density; nothing to fit".into(),
        )),
        CopulaFamily::Empirical => {
            let copula = Copula::empirical(pseudo.to_vec())?;
            Ok(CopulaFit {
                copula,
                log_likelihood: f64::NAN,
                at_boundary: false,
            })
        }
        CopulaFamily::SmoothedEmpirical => {
            let copula = Copula::smoothed_empirical(pseudo)?;
            let ll = total_log_likelihood(&copula, pseudo);
            Ok(CopulaFit {
                copula,
                log_likelihood: ll,
                at_boundary: false,
            })
        }
        CopulaFamily::Clayton | CopulaFamily::Gumbel | CopulaFamily::Frank
        | CopulaFamily::Gaussian => {
            let (lo, hi) = family_bracket(family).expect("parametric family");
            let ll_at = |theta: f64| -> f64 {
                match Copula::parametric(family, theta) {
                    Ok(c) => total_log_likelihood(&c, pseudo),
                    Err(_) => f64::NEG_INFINITY,
                }
            };
            // Coarse scan, then golden-section inside the best point's
            // neighborhood.
            let grid = 65;
            let mut best_i = 0;
            let mut best_ll = f64::NEG_INFINITY;
            for i in 0..grid {
                let theta = lo + (hi - lo) * i as f64 / (grid - 1) as f64;
                let ll = ll_at(theta);
                if ll > best_ll {
                    best_ll = ll;
                    best_i = i;
                }
            }
            let step = (hi - lo) / (grid - 1) as f64;
            let bracket_lo = (lo + step * (best_i as f64 - 1.0)).max(lo);
            let bracket_hi = (lo + step * (best_i as f64 + 1.0)).min(hi);
            let (theta, ll) = golden_section_max(&ll_at, bracket_lo, bracket_hi, 200);
            if !ll.is_finite() {
                return Err(Error::NonConvergence(format!(
                    "{family:?} pseudo-likelihood is not finite anywhere in [{lo}, {hi}]"
                )));
            }
            let span = hi - lo;
            let at_boundary = (theta - lo).abs() < 1e-4 * span || (hi - theta).abs() < 1e-4 * span;
            Ok(CopulaFit {
                copula: Copula::parametric(family, theta)?,
                log_likelihood: ll,
                at_boundary,
            })
        }
    }
}

fn total_log_likelihood(copula: &Copula, pseudo: &[(f64, f64)]) -> f64 {
    pseudo
        .iter()
        .map(|&(u, v)| copula.log_density(u, v).unwrap_or(f64::NEG_INFINITY))
        .sum()
}

/// Golden-section search for a maximum of a unimodal function on [lo, hi].
fn golden_section_max(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if b - a < 1e-10 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
