//! Parametric mortality laws.
//!
//! Four laws cover the corpus well:
//!
//! * **Gompertz** — exponential senescent hazard `μ(x) = A·e^{Bx}`.
//! * **Beard** — logistic hazard `μ(x) = A·e^{Bx} / (1 + K·A·e^{Bx})`,
//!   which plateaus at `1/K` instead of growing without bound.
//! * **Carrière** — a three-component survival mixture
//!   `S(x) = ψ₁·S_weibull + ψ₂·S_lognormal + ψ₃·S_gompertz` capturing
//!   childhood mortality, the young-adult hump, and senescence.
//! * **Heligman–Pollard** — the eight-parameter odds model
//!   `q(x)/p(x) = A^{(x+B)^C} + D·e^{-E·(ln x - ln F)²} + G·H^x`, a discrete
//!   law defined through one-year death probabilities. At age 0 the hump
//!   term is dropped (its log blows up) and within a year the hazard is
//!   taken constant, so survival and hazard stay exactly consistent.
//!
//! Fitting minimizes exposure-weighted squared error on the log of the
//! one-year integrated hazard (continuous laws) or on logit `q` (Heligman–
//! Pollard, which is defined on that scale), via multi-start Nelder–Mead in
//! a transformed unconstrained parameter space.

use crate::error::{Error, Result};
use crate::normal::{norm_cdf, norm_pdf};
use crate::subseed;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub mod simplex;

/// Evaluation floor for mixture hazards: the Weibull childhood component
/// has an unbounded hazard at exactly age zero when its shape is below one.
const AGE_FLOOR: f64 = 1e-9;

/// The four supported law families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    Gompertz,
    Beard,
    Carriere,
    HeligmanPollard,
}

impl std::str::FromStr for LawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gompertz" => Ok(LawKind::Gompertz),
            "beard" => Ok(LawKind::Beard),
            "carriere" => Ok(LawKind::Carriere),
            "heligman-pollard" | "heligman_pollard" | "hp" => Ok(LawKind::HeligmanPollard),
            other => Err(Error::InvalidInput(format!("unknown law {other:?}"))),
        }
    }
}

/// Parameters of one mortality law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LawParams {
    Gompertz {
        /// Hazard level at age 0.
        a: f64,
        /// Exponential growth rate of the hazard.
        b: f64,
    },
    Beard {
        /// Gompertz numerator level.
        a: f64,
        /// Gompertz numerator growth rate.
        b: f64,
        /// Logistic damping; the hazard plateaus at `1/k`. `k = 0` recovers
        /// Gompertz.
        k: f64,
    },
    Carriere {
        /// Weight of the Weibull childhood component.
        psi_child: f64,
        /// Weight of the lognormal young-adult hump.
        psi_hump: f64,
        /// Weight of the Gompertz senescent component.
        psi_old: f64,
        /// Weibull scale in years.
        weibull_scale: f64,
        /// Weibull shape; below one the childhood hazard decreases with age.
        weibull_shape: f64,
        /// Mean of log age for the hump component.
        hump_mu: f64,
        /// Spread of log age for the hump component.
        hump_sigma: f64,
        /// Senescent Gompertz level.
        gompertz_a: f64,
        /// Senescent Gompertz growth rate.
        gompertz_b: f64,
    },
    HeligmanPollard {
        /// Childhood level, in (0, 1); close to the infant death probability.
        a: f64,
        /// Childhood age offset.
        b: f64,
        /// Childhood decline rate.
        c: f64,
        /// Accident-hump severity.
        d: f64,
        /// Accident-hump spread (inverse).
        e: f64,
        /// Accident-hump location in years.
        f: f64,
        /// Senescent level.
        g: f64,
        /// Senescent growth base, above 1.
        h: f64,
    },
}

impl LawParams {
    pub fn kind(&self) -> LawKind {
        match self {
            LawParams::Gompertz { .. } => LawKind::Gompertz,
            LawParams::Beard { .. } => LawKind::Beard,
            LawParams::Carriere { .. } => LawKind::Carriere,
            LawParams::HeligmanPollard { .. } => LawKind::HeligmanPollard,
        }
    }

    /// Check the admissible-domain constraints of each family.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            LawParams::Gompertz { a, b } => {
                positive("a", a)?;
                positive("b", b)
            }
            LawParams::Beard { a, b, k } => {
                positive("a", a)?;
                positive("b", b)?;
                if k.is_finite() && k >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("k must be non-negative, got {k}")))
                }
            }
            LawParams::Carriere {
                psi_child,
                psi_hump,
                psi_old,
                weibull_scale,
                weibull_shape,
                hump_mu,
                hump_sigma,
                gompertz_a,
                gompertz_b,
            } => {
                for (name, w) in [
                    ("psi_child", psi_child),
                    ("psi_hump", psi_hump),
                    ("psi_old", psi_old),
                ] {
                    if !w.is_finite() || w < 0.0 {
                        return Err(Error::Domain(format!(
                            "{name} must be non-negative, got {w}"
                        )));
                    }
                }
                let sum = psi_child + psi_hump + psi_old;
                if (sum - 1.0).abs() > 1e-6 {
                    return Err(Error::Domain(format!(
                        "mixture weights must sum to 1, got {sum}"
                    )));
                }
                positive("weibull_scale", weibull_scale)?;
                positive("weibull_shape", weibull_shape)?;
                if !hump_mu.is_finite() {
                    return Err(Error::Domain("hump_mu must be finite".into()));
                }
                positive("hump_sigma", hump_sigma)?;
                positive("gompertz_a", gompertz_a)?;
                positive("gompertz_b", gompertz_b)
            }
            LawParams::HeligmanPollard {
                a,
                b,
                c,
                d,
                e,
                f,
                g,
                h,
            } => {
                if !(a.is_finite() && a > 0.0 && a < 1.0) {
                    return Err(Error::Domain(format!("a must be in (0, 1), got {a}")));
                }
                for (name, v) in [("b", b), ("c", c), ("d", d), ("e", e), ("f", f), ("g", g)] {
                    positive(name, v)?;
                }
                if !(h.is_finite() && h > 1.0) {
                    return Err(Error::Domain(format!("h must exceed 1, got {h}")));
                }
                Ok(())
            }
        }
    }

    /// Survival function `S(x)`. For the three continuous laws this is the
    /// closed form; for Heligman–Pollard it is the year-by-year product of
    /// `p_k` with constant hazard inside the final fractional year.
    pub fn survival(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        match *self {
            LawParams::Gompertz { a, b } => gompertz_survival(a, b, x),
            LawParams::Beard { a, b, k } => beard_survival(a, b, k, x),
            LawParams::Carriere {
                psi_child,
                psi_hump,
                psi_old,
                weibull_scale,
                weibull_shape,
                hump_mu,
                hump_sigma,
                gompertz_a,
                gompertz_b,
            } => {
                psi_child * weibull_survival(weibull_scale, weibull_shape, x)
                    + psi_hump * lognormal_survival(hump_mu, hump_sigma, x)
                    + psi_old * gompertz_survival(gompertz_a, gompertz_b, x)
            }
            LawParams::HeligmanPollard { .. } => {
                let whole = x.floor() as u32;
                let frac = x - whole as f64;
                let mut s = 1.0;
                for k in 0..whole {
                    s *= 1.0 - self.one_year_q(k);
                    if s == 0.0 {
                        return 0.0;
                    }
                }
                if frac > 0.0 {
                    let p = 1.0 - self.one_year_q(whole);
                    s *= p.powf(frac);
                }
                s
            }
        }
    }

    /// Force of mortality `μ(x)`. For Heligman–Pollard this is the constant
    /// hazard `-ln p_x` implied over the year `[⌊x⌋, ⌊x⌋+1)`.
    pub fn hazard(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        match *self {
            LawParams::Gompertz { a, b } => a * (b * x).exp(),
            LawParams::Beard { a, b, k } => {
                let g = a * (b * x).exp();
                g / (1.0 + k * g)
            }
            LawParams::Carriere {
                psi_child,
                psi_hump,
                psi_old,
                weibull_scale,
                weibull_shape,
                hump_mu,
                hump_sigma,
                gompertz_a,
                gompertz_b,
            } => {
                let x = x.max(AGE_FLOOR);
                let density = psi_child * weibull_density(weibull_scale, weibull_shape, x)
                    + psi_hump * lognormal_density(hump_mu, hump_sigma, x)
                    + psi_old
                        * gompertz_a
                        * (gompertz_b * x).exp()
                        * gompertz_survival(gompertz_a, gompertz_b, x);
                density / self.survival(x)
            }
            LawParams::HeligmanPollard { .. } => {
                let q = self.one_year_q(x.floor() as u32);
                -(1.0 - q).ln()
            }
        }
    }

    /// One-year death probability `q(x) = 1 - S(x+1)/S(x)` at integer age.
    pub fn one_year_q(&self, x: u32) -> f64 {
        match self {
            LawParams::HeligmanPollard { .. } => {
                let r = self.hp_odds(x);
                r / (1.0 + r)
            }
            _ => {
                let m = self.year_hazard(x);
                1.0 - (-m).exp()
            }
        }
    }

    /// Integrated hazard over `[x, x+1)`, i.e. `-ln(S(x+1)/S(x))`. Computed
    /// in closed form where possible to avoid cancellation.
    pub fn year_hazard(&self, x: u32) -> f64 {
        let xf = x as f64;
        match *self {
            LawParams::Gompertz { a, b } => a / b * ((b * (xf + 1.0)).exp() - (b * xf).exp()),
            LawParams::Beard { a, b, k } => {
                if k < 1e-12 {
                    a / b * ((b * (xf + 1.0)).exp() - (b * xf).exp())
                } else {
                    let g0 = 1.0 + k * a * (b * xf).exp();
                    let g1 = 1.0 + k * a * (b * (xf + 1.0)).exp();
                    (g1 / g0).ln() / (k * b)
                }
            }
            LawParams::Carriere { .. } => {
                let s0 = self.survival(xf);
                let s1 = self.survival(xf + 1.0);
                if s0 <= 0.0 {
                    f64::INFINITY
                } else {
                    -(s1 / s0).ln()
                }
            }
            LawParams::HeligmanPollard { .. } => (1.0 + self.hp_odds(x)).ln(),
        }
    }

    /// Heligman–Pollard mortality odds `q/p` at integer age; the hump term
    /// is dropped at age 0.
    fn hp_odds(&self, x: u32) -> f64 {
        let LawParams::HeligmanPollard {
            a,
            b,
            c,
            d,
            e,
            f,
            g,
            h,
        } = *self
        else {
            unreachable!("hp_odds is only called on Heligman-Pollard parameters");
        };
        let xf = x as f64;
        let childhood = a.powf((xf + b).powf(c));
        let hump = if x == 0 {
            0.0
        } else {
            d * (-e * (xf.ln() - f.ln()).powi(2)).exp()
        };
        let senescent = g * h.powf(xf);
        childhood + hump + senescent
    }
}

fn gompertz_survival(a: f64, b: f64, x: f64) -> f64 {
    (-(a / b) * ((b * x).exp() - 1.0)).exp()
}

fn beard_survival(a: f64, b: f64, k: f64, x: f64) -> f64 {
    if k < 1e-12 {
        gompertz_survival(a, b, x)
    } else {
        ((1.0 + k * a) / (1.0 + k * a * (b * x).exp())).powf(1.0 / (k * b))
    }
}

fn weibull_survival(scale: f64, shape: f64, x: f64) -> f64 {
    (-(x / scale).powf(shape)).exp()
}

fn weibull_density(scale: f64, shape: f64, x: f64) -> f64 {
    shape / scale * (x / scale).powf(shape - 1.0) * weibull_survival(scale, shape, x)
}

fn lognormal_survival(mu: f64, sigma: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        1.0 - norm_cdf((x.ln() - mu) / sigma)
    }
}

fn lognormal_density(mu: f64, sigma: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        norm_pdf((x.ln() - mu) / sigma) / (x * sigma)
    }
}

// ===== Simulation =====

/// Inverse-transform lifetime sampler on a fine survival grid.
///
/// The survival curve is tabulated every 0.01 years up to the grid maximum;
/// a uniform draw is mapped through the inverse with linear interpolation.
/// Draws falling beyond the grid are clamped to the maximum age.
#[derive(Debug, Clone)]
pub struct LifetimeSampler {
    law: LawParams,
    max_age: f64,
    terminal_survival: f64,
}

impl LifetimeSampler {
    pub fn new(law: &LawParams, max_age: f64) -> Result<Self> {
        law.validate()?;
        if !max_age.is_finite() || max_age <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "maximum age must be positive, got {max_age}"
            )));
        }
        Ok(LifetimeSampler {
            law: law.clone(),
            max_age,
            terminal_survival: law.survival(max_age),
        })
    }

    /// Age `t` with `S(t) = u`, found by bisection (survival curves with
    /// infant-mortality humps bend too sharply near zero for interpolation
    /// on any fixed grid). Clamped to `max_age` for `u` below the terminal
    /// survival.
    pub fn lifetime(&self, u: f64) -> f64 {
        if u <= self.terminal_survival {
            return self.max_age;
        }
        if u >= 1.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0f64, self.max_age);
        // S is continuous and non-increasing, so keep S(lo) >= u >= S(hi);
        // 70 halvings put t within ~1e-19 years of the crossing.
        for _ in 0..70 {
            let mid = 0.5 * (lo + hi);
            if self.law.survival(mid) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Draw `n` independent lifetimes.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..n).map(|_| self.lifetime(rng.random::<f64>())).collect()
    }
}

/// Simulate `n` lifetimes from a law, clamped at `max_age`.
pub fn simulate_lifetimes(
    law: &LawParams,
    n: usize,
    max_age: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    Ok(LifetimeSampler::new(law, max_age)?.sample(n, rng))
}

// ===== Fitting =====

/// What an observed per-age rate means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservedRate {
    /// Integrated hazard over the year of age, `-ln(1 - q)`; what a raw
    /// hazard estimate from a life table measures.
    YearHazard,
    /// One-year death probability `q`.
    DeathProb,
}

/// One empirical point: an age, the observed rate, and its exposure weight.
#[derive(Debug, Clone, Copy)]
pub struct Observation {
    pub age: f64,
    pub value: f64,
    pub exposure: f64,
}

/// Options for the multi-start simplex fit.
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Number of starts: one informed by crude moment heuristics, the rest
    /// drawn log-uniformly from per-law parameter boxes.
    pub starts: usize,
    /// Evaluation budget per start.
    pub max_evals: usize,
    /// Seed for the random starts.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            starts: 8,
            max_evals: 5000,
            seed: 0,
        }
    }
}

/// Result of a law fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub params: LawParams,
    /// Exposure-weighted squared error at the optimum, on the fitted scale.
    pub loss: f64,
    /// Total objective evaluations across all starts.
    pub evals: usize,
    /// Whether the best run's simplex collapsed before its budget ran out.
    pub converged: bool,
    /// Whether any fitted parameter escaped far outside the plausible range
    /// the random starts draw from — the signature of a degenerate limit,
    /// such as flat-hazard data pushing the Gompertz slope toward zero.
    pub at_boundary: bool,
    /// Per-point residuals (model minus observed) on the fitted scale:
    /// log year-hazard for the continuous laws, logit q for Heligman–Pollard.
    pub residuals: Vec<f64>,
}

/// Fit a law to per-age empirical rates by exposure-weighted least squares
/// on the law's natural scale (see the module docs).
pub fn fit(
    kind: LawKind,
    data: &[Observation],
    rate: ObservedRate,
    opts: &FitOptions,
) -> Result<FitReport> {
    if data.len() < 10 {
        return Err(Error::InvalidInput(format!(
            "law fitting needs at least 10 age points, got {}",
            data.len()
        )));
    }
    if opts.starts == 0 {
        return Err(Error::InvalidInput("fit needs at least one start".into()));
    }
    // Targets on the fitted scale. Both scales need the observed rate as an
    // integrated hazard and as a death probability.
    let mut ages = Vec::with_capacity(data.len());
    let mut targets = Vec::with_capacity(data.len());
    let mut weights = Vec::with_capacity(data.len());
    for obs in data {
        if !obs.age.is_finite() || obs.age < 0.0 || obs.age > 120.0 {
            return Err(Error::InvalidInput(format!("bad age {}", obs.age)));
        }
        if !obs.exposure.is_finite() || obs.exposure <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "exposure at age {} must be positive",
                obs.age
            )));
        }
        let m = match rate {
            ObservedRate::YearHazard => obs.value,
            ObservedRate::DeathProb => {
                if !(0.0..1.0).contains(&obs.value) || obs.value == 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "death probability at age {} must lie in (0, 1), got {}",
                        obs.age, obs.value
                    )));
                }
                -(1.0 - obs.value).ln()
            }
        };
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "rate at age {} must be positive and finite",
                obs.age
            )));
        }
        let target = match kind {
            // log integrated hazard
            LawKind::Gompertz | LawKind::Beard | LawKind::Carriere => m.ln(),
            // logit q = ln(q / (1 - q)); with q = 1 - e^{-m} this is
            // ln(e^m - 1).
            LawKind::HeligmanPollard => (m.exp() - 1.0).ln(),
        };
        ages.push(obs.age.round() as u32);
        targets.push(target);
        weights.push(obs.exposure);
    }

    let objective = |free: &[f64]| -> f64 {
        let params = params_from_free(kind, free);
        let mut loss = 0.0;
        for ((&x, &t), &w) in ages.iter().zip(&targets).zip(&weights) {
            let pred = predict(&params, x);
            if !pred.is_finite() {
                return f64::INFINITY;
            }
            let r = pred - t;
            loss += w * r * r;
        }
        loss
    };

    // One informed start plus log-uniform random draws from the law's box.
    let mut starts = vec![informed_start(kind, &ages, &targets, &weights)];
    let mut rng = ChaCha12Rng::seed_from_u64(subseed(opts.seed, "law-fit"));
    for _ in 1..opts.starts {
        starts.push(random_start(kind, &mut rng));
    }

    let runs: Vec<simplex::SimplexResult> = starts
        .par_iter()
        .map(|start| {
            let mut f = |p: &[f64]| objective(p);
            let steps = vec![0.25; start.len()];
            simplex::minimize(&mut f, start, &steps, opts.max_evals, 1e-12)
        })
        .collect();

    let mut evals: usize = runs.iter().map(|r| r.evals).sum();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");

    // Polish from the best point with a fresh (smaller) simplex.
    let mut f = |p: &[f64]| objective(p);
    let polish = simplex::minimize(
        &mut f,
        &best.point,
        &vec![0.02; best.point.len()],
        opts.max_evals,
        1e-13,
    );
    evals += polish.evals;
    let (point, value, converged) = if polish.value <= best.value {
        (polish.point, polish.value, polish.converged)
    } else {
        (best.point, best.value, best.converged)
    };

    if !value.is_finite() {
        return Err(Error::NonConvergence(
            "law fit found no finite-loss parameters".into(),
        ));
    }
    let params = params_from_free(kind, &point);
    params.validate().map_err(|e| {
        Error::NonConvergence(format!("law fit left the admissible domain: {e}"))
    })?;
    let residuals = ages
        .iter()
        .zip(&targets)
        .map(|(&x, &t)| predict(&params, x) - t)
        .collect();
    // An optimum more than 3 natural-log units (a factor of ~20) outside the
    // plausible box is a degenerate limit, not a believable parameter set.
    let at_boundary = point
        .iter()
        .zip(free_box(kind))
        .any(|(&z, (lo, hi))| z < lo - 3.0 || z > hi + 3.0);
    Ok(FitReport {
        params,
        loss: value,
        evals,
        converged,
        at_boundary,
        residuals,
    })
}

/// Model prediction on the fitted scale at integer age.
fn predict(params: &LawParams, x: u32) -> f64 {
    match params {
        LawParams::HeligmanPollard { .. } => params.hp_odds(x).ln(),
        _ => params.year_hazard(x).ln(),
    }
}

/// Map unconstrained optimizer coordinates to law parameters.
fn params_from_free(kind: LawKind, free: &[f64]) -> LawParams {
    // Clamp to avoid infinities from runaway simplex steps.
    let ex = |z: f64| z.clamp(-300.0, 300.0).exp();
    match kind {
        LawKind::Gompertz => LawParams::Gompertz {
            a: ex(free[0]),
            b: ex(free[1]),
        },
        LawKind::Beard => LawParams::Beard {
            a: ex(free[0]),
            b: ex(free[1]),
            k: ex(free[2]),
        },
        LawKind::Carriere => {
            let (z1, z2) = (free[0].clamp(-300.0, 300.0), free[1].clamp(-300.0, 300.0));
            let m = z1.max(z2).max(0.0);
            let denom = (z1 - m).exp() + (z2 - m).exp() + (-m).exp();
            LawParams::Carriere {
                psi_child: (z1 - m).exp() / denom,
                psi_hump: (z2 - m).exp() / denom,
                psi_old: (-m).exp() / denom,
                weibull_scale: ex(free[2]),
                weibull_shape: ex(free[3]),
                hump_mu: free[4].clamp(-10.0, 10.0),
                hump_sigma: ex(free[5]),
                gompertz_a: ex(free[6]),
                gompertz_b: ex(free[7]),
            }
        }
        LawKind::HeligmanPollard => LawParams::HeligmanPollard {
            a: 1.0 / (1.0 + (-free[0].clamp(-300.0, 300.0)).exp()),
            b: ex(free[1]),
            c: ex(free[2]),
            d: ex(free[3]),
            e: ex(free[4]),
            f: ex(free[5]),
            g: ex(free[6]),
            h: 1.0 + ex(free[7]),
        },
    }
}

/// Inverse of [`params_from_free`], used to seed starts from interpretable
/// parameter guesses.
fn free_from_params(params: &LawParams) -> Vec<f64> {
    match *params {
        LawParams::Gompertz { a, b } => vec![a.ln(), b.ln()],
        LawParams::Beard { a, b, k } => vec![a.ln(), b.ln(), k.ln()],
        LawParams::Carriere {
            psi_child,
            psi_hump,
            psi_old,
            weibull_scale,
            weibull_shape,
            hump_mu,
            hump_sigma,
            gompertz_a,
            gompertz_b,
        } => vec![
            (psi_child / psi_old).ln(),
            (psi_hump / psi_old).ln(),
            weibull_scale.ln(),
            weibull_shape.ln(),
            hump_mu,
            hump_sigma.ln(),
            gompertz_a.ln(),
            gompertz_b.ln(),
        ],
        LawParams::HeligmanPollard {
            a,
            b,
            c,
            d,
            e,
            f,
            g,
            h,
        } => vec![
            (a / (1.0 - a)).ln(),
            b.ln(),
            c.ln(),
            d.ln(),
            e.ln(),
            f.ln(),
            g.ln(),
            (h - 1.0).ln(),
        ],
    }
}

/// Crude heuristic start: a weighted regression of the target on age fixes
/// the senescent slope, and the remaining components get generic values.
fn informed_start(kind: LawKind, ages: &[u32], targets: &[f64], weights: &[f64]) -> Vec<f64> {
    // Weighted least squares of target on age over the senescent range
    // (ages >= 40 when available, else everything).
    let tail: Vec<usize> = {
        let t: Vec<usize> = (0..ages.len()).filter(|&i| ages[i] >= 40).collect();
        if t.len() >= 3 {
            t
        } else {
            (0..ages.len()).collect()
        }
    };
    let wsum: f64 = tail.iter().map(|&i| weights[i]).sum();
    let xm: f64 = tail.iter().map(|&i| weights[i] * ages[i] as f64).sum::<f64>() / wsum;
    let ym: f64 = tail.iter().map(|&i| weights[i] * targets[i]).sum::<f64>() / wsum;
    let sxx: f64 = tail
        .iter()
        .map(|&i| weights[i] * (ages[i] as f64 - xm).powi(2))
        .sum();
    let sxy: f64 = tail
        .iter()
        .map(|&i| weights[i] * (ages[i] as f64 - xm) * (targets[i] - ym))
        .sum();
    let slope = if sxx > 0.0 { (sxy / sxx).clamp(1e-3, 0.5) } else { 0.1 };
    let intercept = ym - slope * xm;

    match kind {
        LawKind::Gompertz => {
            // target ≈ ln a + ln((e^b - 1)/b) + b·x; the middle term is a
            // small correction the simplex can absorb.
            vec![intercept.clamp(-20.0, -2.0), slope.ln()]
        }
        LawKind::Beard => vec![intercept.clamp(-20.0, -2.0), slope.ln(), (0.05f64).ln()],
        LawKind::Carriere => {
            let params = LawParams::Carriere {
                psi_child: 0.1,
                psi_hump: 0.1,
                psi_old: 0.8,
                weibull_scale: 1.0,
                weibull_shape: 0.5,
                hump_mu: (22.0f64).ln(),
                hump_sigma: 0.35,
                gompertz_a: intercept.clamp(-20.0, -2.0).exp(),
                gompertz_b: slope,
            };
            free_from_params(&params)
        }
        LawKind::HeligmanPollard => {
            // The senescent tail has ln(q/p) ≈ ln g + x·ln h.
            let h = slope.exp().clamp(1.01, 1.4);
            let g = intercept.exp().clamp(1e-8, 1e-2);
            let a = targets
                .first()
                .map(|t| t.exp() / (1.0 + t.exp()))
                .unwrap_or(0.05)
                .clamp(1e-4, 0.4);
            let params = LawParams::HeligmanPollard {
                a,
                b: 0.2,
                c: 0.12,
                d: 1e-3,
                e: 8.0,
                f: 20.0,
                g,
                h,
            };
            free_from_params(&params)
        }
    }
}

/// Log-uniform draw from per-law parameter boxes.
fn random_start(kind: LawKind, rng: &mut impl Rng) -> Vec<f64> {
    // uniform in log space, returned already in free (log) coordinates
    fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
        rng.random_range(lo.ln()..hi.ln())
    }
    match kind {
        LawKind::Gompertz => vec![
            log_uniform(rng, 1e-6, 3e-3),
            log_uniform(rng, 0.03, 0.2),
        ],
        LawKind::Beard => vec![
            log_uniform(rng, 1e-6, 3e-3),
            log_uniform(rng, 0.03, 0.2),
            log_uniform(rng, 1e-3, 1.5),
        ],
        LawKind::Carriere => vec![
            rng.random_range(-4.0..0.0), // weight logits vs the senescent part
            rng.random_range(-4.0..0.0),
            log_uniform(rng, 0.2, 5.0),
            log_uniform(rng, 0.3, 1.2),
            rng.random_range((10.0f64).ln()..(45.0f64).ln()), // hump_mu is already a log age
            log_uniform(rng, 0.15, 0.8),
            log_uniform(rng, 1e-6, 3e-3),
            log_uniform(rng, 0.03, 0.2),
        ],
        LawKind::HeligmanPollard => vec![
            log_uniform(rng, 1e-3, 0.3), // logit(a) ≈ ln a for small a
            log_uniform(rng, 0.05, 2.0),
            log_uniform(rng, 0.05, 0.4),
            log_uniform(rng, 1e-4, 0.02),
            log_uniform(rng, 2.0, 30.0),
            log_uniform(rng, 12.0, 35.0),
            log_uniform(rng, 1e-7, 1e-3),
            log_uniform(rng, 0.03, 0.18),
        ],
    }
}

/// Turn raw lifetimes into per-age death probabilities with exposure
/// weights: `q̂_x = d_x / n_x` over integer ages. Ages with no deaths and
/// the final exhausted age group (where `q̂ = 1`) are skipped.
pub fn empirical_rates(lifetimes: &[f64], omega: u32) -> Result<Vec<Observation>> {
    let table_input: Vec<f64> = lifetimes.to_vec();
    if table_input.is_empty() {
        return Err(Error::EmptyRiskSet("no lifetimes to tabulate".into()));
    }
    let mut deaths = vec![0u64; omega as usize + 1];
    for &t in &table_input {
        if !t.is_finite() || t < 0.0 || t.floor() as u64 > omega as u64 {
            return Err(Error::InvalidInput(format!("lifetime {t} out of range")));
        }
        deaths[t.floor() as usize] += 1;
    }
    let mut alive = table_input.len() as u64;
    let mut out = Vec::new();
    for (x, &d) in deaths.iter().enumerate() {
        if alive > 0 && d > 0 && d < alive {
            out.push(Observation {
                age: x as f64,
                value: d as f64 / alive as f64,
                exposure: alive as f64,
            });
        }
        alive -= d.min(alive);
    }
    Ok(out)
}
