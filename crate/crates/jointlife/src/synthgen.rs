//! Synthetic genealogy generator: multi-generation person corpora with
//! controlled copula dependence between spouse lifetimes and between child
//! and mean-parent lifetimes, plus configurable missing-date corruption.
//! Serves as the validation oracle for the whole ingestion/estimation
//! pipeline.

use crate::copulas::{Copula, CopulaFamily};
use crate::dates::{DAYS_PER_YEAR, PartialDate};
use crate::error::{Error, Result};
use crate::family::{PersonRecord, Sex};
use crate::laws::{LawParams, LifetimeSampler};
use crate::subseed;
use chrono::{Datelike, NaiveDate};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fractions of dates degraded or removed for one sex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissingRates {
    /// Fraction of surviving dates reduced to year-only precision.
    pub year_only: f64,
    /// Fraction of birth dates removed entirely.
    pub drop_birth: f64,
    /// Fraction of death dates removed entirely.
    pub drop_death: f64,
}

impl Default for MissingRates {
    fn default() -> Self {
        MissingRates {
            year_only: 0.0,
            drop_birth: 0.0,
            drop_death: 0.0,
        }
    }
}

impl MissingRates {
    fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("year_only", self.year_only),
            ("drop_birth", self.drop_birth),
            ("drop_death", self.drop_death),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidInput(format!(
                    "missing rate {name} must lie in [0,1], got {r}"
                )));
            }
        }
        Ok(())
    }
}

/// Configuration for one synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    /// Founding individuals (paired into couples; must be even and ≥ 2).
    pub n_founders: usize,
    /// Total generations including the founders.
    pub generations: u32,
    pub male_law: LawParams,
    pub female_law: LawParams,
    pub spouse_copula: CopulaFamily,
    pub spouse_theta: f64,
    pub parent_child_copula: CopulaFamily,
    pub parent_child_theta: f64,
    pub male_missing: MissingRates,
    pub female_missing: MissingRates,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_founders: 2000,
            generations: 3,
            male_law: LawParams::Gompertz {
                a: 2.26e-4,
                b: 0.085,
            },
            female_law: LawParams::Gompertz {
                a: 1.83e-4,
                b: 0.09,
            },
            spouse_copula: CopulaFamily::Frank,
            spouse_theta: 3.367,
            parent_child_copula: CopulaFamily::Gaussian,
            parent_child_theta: 0.5,
            male_missing: MissingRates::default(),
            female_missing: MissingRates::default(),
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_founders < 2 || self.n_founders % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "n_founders must be even and ≥ 2, got {}",
                self.n_founders
            )));
        }
        if self.generations < 1 {
            return Err(Error::InvalidInput("generations must be ≥ 1".into()));
        }
        self.male_law.validate()?;
        self.female_law.validate()?;
        self.male_missing.validate()?;
        self.female_missing.validate()?;
        // Builds both copulas up front so bad families/parameters fail here.
        Copula::parametric(self.spouse_copula, self.spouse_theta)?;
        Copula::parametric(self.parent_child_copula, self.parent_child_theta)?;
        Ok(())
    }
}

const MAX_LIFE: f64 = 105.0;
/// Parents only reproduce if both survive past this age.
const MIN_REPRODUCTIVE_AGE: f64 = 20.0;
const MAX_BIRTH_AGE: f64 = 40.0;

struct Person {
    sex: Sex,
    birth_days: i64,
    lifetime: f64,
    father: Option<usize>,
    mother: Option<usize>,
}

impl Person {
    fn death_days(&self) -> i64 {
        self.birth_days + (self.lifetime * DAYS_PER_YEAR).round() as i64
    }
}

fn days_of(year: i32, month: u32, day: u32) -> i64 {
    NaiveDate::from_ymd_opt(year, month, day)
        .expect("valid calendar date")
        .num_days_from_ce() as i64
}

/// Zero-truncated Poisson(2) draw.
fn children_count(rng: &mut impl Rng) -> usize {
    loop {
        // Knuth's product method; λ=2 keeps the loop short.
        let threshold = (-2.0f64).exp();
        let mut k = 0usize;
        let mut p = 1.0;
        loop {
            p *= rng.random::<f64>();
            if p <= threshold {
                break;
            }
            k += 1;
        }
        if k >= 1 {
            return k;
        }
    }
}

/// Ascending average ranks (ties averaged), 1-based.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Generate a corpus of person records with the configured dependence
/// structure. Deterministic given the config (including its seed).
pub fn generate(config: &GenConfig) -> Result<Vec<PersonRecord>> {
    config.validate()?;
    let spouse = Copula::parametric(config.spouse_copula, config.spouse_theta)?;
    let parent_child = Copula::parametric(config.parent_child_copula, config.parent_child_theta)?;
    let male_sampler = LifetimeSampler::new(&config.male_law, MAX_LIFE)?;
    let female_sampler = LifetimeSampler::new(&config.female_law, MAX_LIFE)?;

    let mut persons: Vec<Person> = Vec::new();
    let n_couples = config.n_founders / 2;

    // Founders: couple lifetimes drawn straight from the spouse copula,
    // birthdays uniform over 1800-1804.
    let mut rng = ChaCha12Rng::seed_from_u64(subseed(config.seed, "founders"));
    let founder_pairs = spouse.sample(n_couples, &mut rng)?;
    let epoch = days_of(1800, 1, 1);
    let epoch_span = days_of(1805, 1, 1) - epoch; // exclusive upper bound
    let mut couples: Vec<(usize, usize)> = Vec::with_capacity(n_couples);
    for (u, v) in founder_pairs {
        let husband = persons.len();
        persons.push(Person {
            sex: Sex::Male,
            birth_days: epoch + rng.random_range(0..epoch_span),
            lifetime: male_sampler.lifetime(u),
            father: None,
            mother: None,
        });
        let wife = persons.len();
        persons.push(Person {
            sex: Sex::Female,
            birth_days: epoch + rng.random_range(0..epoch_span),
            lifetime: female_sampler.lifetime(v),
            father: None,
            mother: None,
        });
        couples.push((husband, wife));
    }

    for g in 2..=config.generations {
        // Children: each couple reproduces when both parents pass the
        // reproductive age; the child's lifetime rank is drawn from the
        // parent-child copula conditioned on the couple's mean-lifetime
        // rank, which keeps child marginals exactly on the configured law.
        let means: Vec<f64> = couples
            .iter()
            .map(|&(h, w)| 0.5 * (persons[h].lifetime + persons[w].lifetime))
            .collect();
        let ranks = average_ranks(&means);
        let n = couples.len();
        let gen_seed = subseed(config.seed, &format!("children-{g}"));
        let broods: Vec<Vec<Person>> = couples
            .par_iter()
            .enumerate()
            .map(|(i, &(h, w))| -> Result<Vec<Person>> {
                let (t_h, t_w) = (persons[h].lifetime, persons[w].lifetime);
                if t_h.min(t_w) <= MIN_REPRODUCTIVE_AGE {
                    return Ok(Vec::new());
                }
                let mut rng = ChaCha12Rng::seed_from_u64(gen_seed);
                rng.set_stream(i as u64 + 1);
                let u_parent = 1.0 - ranks[i] / (n as f64 + 1.0);
                let mut brood = Vec::new();
                for _ in 0..children_count(&mut rng) {
                    let sex = if rng.random::<bool>() {
                        Sex::Male
                    } else {
                        Sex::Female
                    };
                    let mother_age =
                        rng.random_range(MIN_REPRODUCTIVE_AGE..MAX_BIRTH_AGE.min(t_w));
                    let draw = rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12);
                    let v = parent_child.conditional_sample(u_parent, draw)?;
                    let sampler = match sex {
                        Sex::Male => &male_sampler,
                        Sex::Female => &female_sampler,
                    };
                    brood.push(Person {
                        sex,
                        birth_days: persons[w].birth_days
                            + (mother_age * DAYS_PER_YEAR).round() as i64,
                        lifetime: sampler.lifetime(v),
                        father: Some(h),
                        mother: Some(w),
                    });
                }
                Ok(brood)
            })
            .collect::<Result<_>>()?;
        let first_child = persons.len();
        for brood in broods {
            persons.extend(brood);
        }

        if g == config.generations {
            break;
        }

        // Marry the new generation by rank matching: a fresh copula sample
        // fixes the joint rank pattern, and spouses are assigned so the
        // married lifetimes reproduce it. Surplus children stay unmarried.
        let mut males: Vec<usize> = Vec::new();
        let mut females: Vec<usize> = Vec::new();
        for idx in first_child..persons.len() {
            match persons[idx].sex {
                Sex::Male => males.push(idx),
                Sex::Female => females.push(idx),
            }
        }
        let k = males.len().min(females.len());
        if k == 0 {
            couples.clear();
            continue;
        }
        males.truncate(k);
        females.truncate(k);
        // Longest-lived first: ascending u in the survival orientation.
        males.sort_by(|&a, &b| persons[b].lifetime.total_cmp(&persons[a].lifetime));
        females.sort_by(|&a, &b| persons[b].lifetime.total_cmp(&persons[a].lifetime));
        let mut pair_rng = ChaCha12Rng::seed_from_u64(subseed(config.seed, &format!("pair-{g}")));
        let samples = spouse.sample(k, &mut pair_rng)?;
        let mut by_u: Vec<usize> = (0..k).collect();
        by_u.sort_by(|&a, &b| samples[a].0.total_cmp(&samples[b].0).then(a.cmp(&b)));
        let mut by_v: Vec<usize> = (0..k).collect();
        by_v.sort_by(|&a, &b| samples[a].1.total_cmp(&samples[b].1).then(a.cmp(&b)));
        let mut v_rank = vec![0usize; k];
        for (pos, &s) in by_v.iter().enumerate() {
            v_rank[s] = pos;
        }
        couples = by_u
            .iter()
            .enumerate()
            .map(|(pos, &s)| (males[pos], females[v_rank[s]]))
            .collect();
    }

    // Corrupt dates at the configured per-sex rates, then emit records.
    let mut miss_rng = ChaCha12Rng::seed_from_u64(subseed(config.seed, "missing"));
    let id_of = |idx: usize| format!("P{idx:06}");
    let records = persons
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let rates = match p.sex {
                Sex::Male => config.male_missing,
                Sex::Female => config.female_missing,
            };
            let draws: [f64; 4] = std::array::from_fn(|_| miss_rng.random::<f64>());
            let date_field = |days: i64, drop: f64, year_roll: f64, drop_roll: f64| {
                if drop_roll < drop {
                    return None;
                }
                let date = NaiveDate::from_num_days_from_ce_opt(days as i32)
                    .expect("generated dates stay in calendar range");
                let partial = if year_roll < rates.year_only {
                    PartialDate::new(date.year(), None, None)
                } else {
                    PartialDate::new(
                        date.year(),
                        Some(date.month() as u8),
                        Some(date.day() as u8),
                    )
                };
                Some(partial.expect("calendar components are valid"))
            };
            PersonRecord {
                id: id_of(idx),
                sex: p.sex,
                birth: date_field(p.birth_days, rates.drop_birth, draws[0], draws[1]),
                death: date_field(p.death_days(), rates.drop_death, draws[2], draws[3]),
                father_id: p.father.map(id_of),
                mother_id: p.mother.map(id_of),
            }
        })
        .collect();
    Ok(records)
}
