//! Present-value pricing of single-life and joint-life products on discrete
//! life tables: insurances, annuities, conditional variants, and the
//! independence/comonotone bounds for two-life contracts.

use crate::copulas::Copula;
use crate::error::{Error, Result};
use crate::lifetable::{ConditionalTable, LifeTable};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Default annual effective interest rate.
pub const DEFAULT_RATE: f64 = 0.03;
/// Default number of yearly terms in truncated present-value sums.
pub const DEFAULT_HORIZON: u32 = 100;

/// Discounting basis: an annual effective rate `i` and its factor ν = 1/(1+i).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discount {
    rate: f64,
    nu: f64,
}

impl Discount {
    pub fn new(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate <= -1.0 {
            return Err(Error::InvalidInput(format!(
                "interest rate must be finite and > -1, got {rate}"
            )));
        }
        Ok(Discount {
            rate,
            nu: 1.0 / (1.0 + rate),
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// ν^t — the present value of 1 paid in `t` years.
    pub fn factor(&self, t: u32) -> f64 {
        self.nu.powi(t as i32)
    }
}

impl Default for Discount {
    fn default() -> Self {
        Discount::new(DEFAULT_RATE).expect("default rate is valid")
    }
}

/// Product kinds priced by the engine. `Term` and `Endowment` read the
/// horizon argument as their contract length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Product {
    Annuity,
    WholeLife,
    Term,
    Endowment,
    Joint,
    LastSurvivor,
    Widow,
}

impl Product {
    /// Does this product need two lives and a copula?
    pub fn is_joint(&self) -> bool {
        matches!(self, Product::Joint | Product::LastSurvivor | Product::Widow)
    }
}

impl fmt::Display for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Product::Annuity => "annuity",
            Product::WholeLife => "whole",
            Product::Term => "term",
            Product::Endowment => "endowment",
            Product::Joint => "joint",
            Product::LastSurvivor => "last",
            Product::Widow => "widow",
        })
    }
}

impl std::str::FromStr for Product {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "annuity" => Ok(Product::Annuity),
            "whole" | "whole_life" => Ok(Product::WholeLife),
            "term" => Ok(Product::Term),
            "endowment" => Ok(Product::Endowment),
            "joint" => Ok(Product::Joint),
            "last" | "last_survivor" => Ok(Product::LastSurvivor),
            "widow" => Ok(Product::Widow),
            other => Err(Error::InvalidInput(format!("unknown product {other:?}"))),
        }
    }
}

fn check_age(table: &LifeTable, x: u32) -> Result<()> {
    if x > table.omega() {
        return Err(Error::Domain(format!(
            "age {x} beyond table limit {}",
            table.omega()
        )));
    }
    Ok(())
}

/// Whole-life insurance paying 1 at the end of the year of death:
/// Aₓ = Σ_{k} ν^{k+1} ₖpₓ q_{x+k}, truncated to `horizon` terms.
pub fn whole_life_insurance(
    table: &LifeTable,
    x: u32,
    disc: &Discount,
    horizon: u32,
) -> Result<f64> {
    check_age(table, x)?;
    let mut value = 0.0;
    let mut kpx = 1.0;
    for k in 0..horizon {
        let age = x + k;
        if age > table.omega() || kpx <= 0.0 {
            break;
        }
        let q = table.qx(age)?;
        value += disc.factor(k + 1) * kpx * q;
        kpx *= 1.0 - q;
    }
    Ok(value)
}

/// Term insurance paying 1 at the end of the year of death if death occurs
/// within `n` years: A¹ = Σ_{k<n} ν^{k+1} ₖpₓ q_{x+k}.
pub fn term_insurance(table: &LifeTable, x: u32, n: u32, disc: &Discount) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("term length must be ≥ 1".into()));
    }
    whole_life_insurance(table, x, disc, n)
}

/// Pure endowment ₙEₓ = νⁿ ₙpₓ: 1 paid at time `n` on survival.
pub fn endowment(table: &LifeTable, x: u32, n: u32, disc: &Discount) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("endowment length must be ≥ 1".into()));
    }
    check_age(table, x)?;
    Ok(disc.factor(n) * table.tpx_or_zero(x, n))
}

/// Life annuity-immediate: aₓ = Σ_{k=1}^{horizon} νᵏ ₖpₓ, paying 1 at the
/// end of each survived year.
pub fn life_annuity(table: &LifeTable, x: u32, disc: &Discount, horizon: u32) -> Result<f64> {
    check_age(table, x)?;
    let mut value = 0.0;
    for k in 1..=horizon {
        let p = table.tpx_or_zero(x, k);
        if p <= 0.0 {
            break;
        }
        value += disc.factor(k) * p;
    }
    Ok(value)
}

/// Temporary annuity-immediate truncated at `n` payments.
pub fn temporary_annuity(table: &LifeTable, x: u32, n: u32, disc: &Discount) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("annuity length must be ≥ 1".into()));
    }
    life_annuity(table, x, disc, n)
}

/// Whole-life value on a continuous-payment basis. The engine prices on the
/// end-of-year grid only; `end_of_year_basis` records that the returned
/// value carries no continuous-time adjustment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContinuousInsurance {
    pub value: f64,
    pub end_of_year_basis: bool,
}

pub fn continuous_whole_life_insurance(
    table: &LifeTable,
    x: u32,
    disc: &Discount,
    horizon: u32,
) -> Result<ContinuousInsurance> {
    Ok(ContinuousInsurance {
        value: whole_life_insurance(table, x, disc, horizon)?,
        end_of_year_basis: true,
    })
}

/// Price a single-life product. `Term` and `Endowment` use `horizon` as the
/// contract length; joint products are rejected.
pub fn single_life_value(
    table: &LifeTable,
    product: Product,
    x: u32,
    disc: &Discount,
    horizon: u32,
) -> Result<f64> {
    match product {
        Product::Annuity => life_annuity(table, x, disc, horizon),
        Product::WholeLife => whole_life_insurance(table, x, disc, horizon),
        Product::Term => term_insurance(table, x, horizon, disc),
        Product::Endowment => endowment(table, x, horizon, disc),
        _ => Err(Error::InvalidInput(format!(
            "product {product} needs two lives; use a joint model"
        ))),
    }
}

/// A conditional price next to its unconditional baseline.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionalValue {
    pub value: f64,
    pub baseline: f64,
    /// 100·(value − baseline)/baseline.
    pub rel_diff_pct: f64,
}

/// Price a product on a status-conditional table and report the relative
/// difference to the unconditional baseline at the same age.
pub fn conditional_value(
    conditional: &ConditionalTable,
    baseline: &ConditionalTable,
    product: Product,
    disc: &Discount,
    horizon: u32,
) -> Result<ConditionalValue> {
    if conditional.base_age() != baseline.base_age() {
        return Err(Error::InvalidInput(format!(
            "conditional table at age {} but baseline at age {}",
            conditional.base_age(),
            baseline.base_age()
        )));
    }
    let value = single_life_value(conditional.table(), product, 0, disc, horizon)?;
    let base = single_life_value(baseline.table(), product, 0, disc, horizon)?;
    if base == 0.0 {
        return Err(Error::Domain(
            "baseline value is zero; relative difference undefined".into(),
        ));
    }
    Ok(ConditionalValue {
        value,
        baseline: base,
        rel_diff_pct: 100.0 * (value - base) / base,
    })
}

/// Pointwise Fréchet bounds on a joint survival probability given the two
/// marginal survivals: (max(0, p+q−1), min(p, q)).
pub fn frechet_survival_bounds(p_father: f64, p_mother: f64) -> (f64, f64) {
    (
        (p_father + p_mother - 1.0).max(0.0),
        p_father.min(p_mother),
    )
}

/// When the copula couples the two lifetimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaTiming {
    /// Couple the remaining lifetimes at the contract ages:
    /// ₜp_joint = C(ₜp_f, ₜp_m). Dependence acts at full strength at
    /// every entry age.
    AtContract,
    /// Couple the full lifetimes from birth and condition on both lives
    /// having reached their entry ages:
    /// ₜp_joint = C(S_f(x_f+t), S_m(x_m+t)) / C(S_f(x_f), S_m(x_m)).
    /// For families without upper tail dependence (Frank in particular)
    /// the conditional association fades as the entry ages grow.
    FromBirth,
}

/// Joint survival probabilities at one duration.
///
/// `father` and `mother` are always the population remaining-lifetime
/// survivals from the entry ages; `joint` carries the copula coupling (and
/// the entry conditioning under [`CopulaTiming::FromBirth`]), and `last`
/// is the classical inclusion–exclusion combination of the three.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JointSurvival {
    pub father: f64,
    pub mother: f64,
    /// Both alive.
    pub joint: f64,
    /// At least one alive: ₜp_f + ₜp_m − joint.
    pub last: f64,
}

/// Annuity present values for a two-life model.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JointAnnuities {
    pub a_father: f64,
    pub a_mother: f64,
    /// Pays while both are alive.
    pub a_joint: f64,
    /// Pays while at least one is alive.
    pub a_last: f64,
    /// Pays while exactly one is alive: a_last − a_joint.
    pub a_reversion: f64,
    /// Pays to the wife after the husband's death: a_mother − a_joint.
    pub a_widow: f64,
}

/// The same annuities under the independence and comonotone copulas —
/// the conservative and anti-conservative ends for PQD dependence.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnnuityBounds {
    pub independent: JointAnnuities,
    pub comonotone: JointAnnuities,
}

/// Two lives (father aged `x_f` on his table, mother aged `x_m` on hers)
/// coupled through a survival copula.
#[derive(Debug, Clone)]
pub struct JointModel<'a> {
    father: &'a LifeTable,
    mother: &'a LifeTable,
    copula: &'a Copula,
    father_age: u32,
    mother_age: u32,
    timing: CopulaTiming,
    /// C(S_f(x_f), S_m(x_m)): the both-alive mass at entry; 1 in
    /// at-contract timing.
    entry_joint: f64,
}

impl<'a> JointModel<'a> {
    /// Couple the remaining lifetimes at the contract ages (see
    /// [`CopulaTiming::AtContract`]).
    pub fn new(
        father: &'a LifeTable,
        mother: &'a LifeTable,
        copula: &'a Copula,
        father_age: u32,
        mother_age: u32,
    ) -> Result<Self> {
        check_age(father, father_age)?;
        check_age(mother, mother_age)?;
        Ok(JointModel {
            father,
            mother,
            copula,
            father_age,
            mother_age,
            timing: CopulaTiming::AtContract,
            entry_joint: 1.0,
        })
    }

    /// Couple the full lifetimes from birth and condition on both lives
    /// being alive at the entry ages (see [`CopulaTiming::FromBirth`]).
    /// Errors when the table assigns no chance of both reaching them.
    pub fn from_birth(
        father: &'a LifeTable,
        mother: &'a LifeTable,
        copula: &'a Copula,
        father_age: u32,
        mother_age: u32,
    ) -> Result<Self> {
        check_age(father, father_age)?;
        check_age(mother, mother_age)?;
        let entry_joint = copula.cdf(
            father.tpx_or_zero(0, father_age),
            mother.tpx_or_zero(0, mother_age),
        );
        if entry_joint <= 0.0 {
            return Err(Error::Domain(format!(
                "zero probability of both lives reaching ages ({father_age}, {mother_age})"
            )));
        }
        Ok(JointModel {
            father,
            mother,
            copula,
            father_age,
            mother_age,
            timing: CopulaTiming::FromBirth,
            entry_joint,
        })
    }

    pub fn ages(&self) -> (u32, u32) {
        (self.father_age, self.mother_age)
    }

    pub fn copula(&self) -> &Copula {
        self.copula
    }

    pub fn timing(&self) -> CopulaTiming {
        self.timing
    }

    fn marginals(&self, t: u32) -> (f64, f64) {
        (
            self.father.tpx_or_zero(self.father_age, t),
            self.mother.tpx_or_zero(self.mother_age, t),
        )
    }

    /// Both-alive probability at duration `t` under the model's timing.
    fn joint_p(&self, t: u32) -> f64 {
        match self.timing {
            CopulaTiming::AtContract => {
                let (pf, pm) = self.marginals(t);
                self.copula.cdf(pf, pm)
            }
            CopulaTiming::FromBirth => {
                let sf = self.father.tpx_or_zero(0, self.father_age + t);
                let sm = self.mother.tpx_or_zero(0, self.mother_age + t);
                self.copula.cdf(sf, sm) / self.entry_joint
            }
        }
    }

    /// Survival probabilities at duration `t` under the model's copula.
    pub fn survival(&self, t: u32) -> JointSurvival {
        let (pf, pm) = self.marginals(t);
        let joint = self.joint_p(t);
        JointSurvival {
            father: pf,
            mother: pm,
            joint,
            last: pf + pm - joint,
        }
    }

    fn annuities_from(
        &self,
        joint_of: impl Fn(u32, f64, f64) -> f64,
        disc: &Discount,
        horizon: u32,
    ) -> JointAnnuities {
        let (mut a_father, mut a_mother, mut a_joint, mut a_last) = (0.0, 0.0, 0.0, 0.0);
        for t in 1..=horizon {
            let (pf, pm) = self.marginals(t);
            if pf <= 0.0 && pm <= 0.0 {
                break;
            }
            let joint = joint_of(t, pf, pm);
            let factor = disc.factor(t);
            a_father += factor * pf;
            a_mother += factor * pm;
            a_joint += factor * joint;
            a_last += factor * (pf + pm - joint);
        }
        JointAnnuities {
            a_father,
            a_mother,
            a_joint,
            a_last,
            a_reversion: a_last - a_joint,
            a_widow: a_mother - a_joint,
        }
    }

    /// The four two-life annuities (plus the single-life ones) under the
    /// model's copula.
    pub fn annuities(&self, disc: &Discount, horizon: u32) -> JointAnnuities {
        self.annuities_from(|t, _, _| self.joint_p(t), disc, horizon)
    }

    /// Closed-form independence (a^⊥) and comonotone (a^+) annuity values
    /// on the same marginals.
    pub fn bounds(&self, disc: &Discount, horizon: u32) -> AnnuityBounds {
        AnnuityBounds {
            independent: self.annuities_from(|_, pf, pm| pf * pm, disc, horizon),
            comonotone: self.annuities_from(|_, pf, pm| pf.min(pm), disc, horizon),
        }
    }

    /// Dispatch a joint product value from [`annuities`](Self::annuities).
    pub fn value(&self, product: Product, disc: &Discount, horizon: u32) -> Result<f64> {
        let a = self.annuities(disc, horizon);
        match product {
            Product::Joint => Ok(a.a_joint),
            Product::LastSurvivor => Ok(a.a_last),
            Product::Widow => Ok(a.a_widow),
            other => Err(Error::InvalidInput(format!(
                "product {other} is single-life; price it on one table"
            ))),
        }
    }
}
