//! Discrete (curtate) life tables estimated from observed ages at death.
//!
//! The estimator is the plain cohort one: with `d_x` deaths at curtate age
//! `x` (deaths in `[x, x+1)`) and `n_x` individuals still alive at exact age
//! `x`,
//!
//! ```text
//! q_x = d_x / n_x,        p_x = 1 - q_x,
//! ```
//!
//! and the table is closed at a maximum age ω by forcing `q_ω = 1`. All
//! quantities derived here are curtate: survival over whole years, and the
//! curtate expectation of life `e_x = Σ_{t≥1} ₜp_x`.

use crate::error::{Error, Result};
use std::path::Path;

/// Default closure age of the tables: nobody in the corpus outlives 105.
pub const MAX_AGE: u32 = 105;

/// Conventional radix `l_0` for the survivors column.
pub const RADIX: f64 = 100_000.0;

/// A closed, single-decrement life table over integer ages `0..=omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct LifeTable {
    omega: u32,
    qx: Vec<f64>,
}

impl LifeTable {
    /// Estimate a table from individual ages at death.
    ///
    /// Ages must be finite, non-negative, and at most `omega + 1` (exclusive
    /// at the top so every death lands in an age group). Ages at death after
    /// the last observed death carry an empty risk set; their `q` is set to 1
    /// so the table stays closed.
    pub fn from_ages_at_death(ages: &[f64], omega: u32) -> Result<Self> {
        if ages.is_empty() {
            return Err(Error::EmptyRiskSet(
                "no ages at death to build a life table from".into(),
            ));
        }
        let mut deaths = vec![0u64; omega as usize + 1];
        for &age in ages {
            if !age.is_finite() || age < 0.0 {
                return Err(Error::InvalidInput(format!("invalid age at death {age}")));
            }
            let x = age.floor() as u64;
            if x > omega as u64 {
                return Err(Error::InvalidInput(format!(
                    "age at death {age} exceeds the table maximum {omega}"
                )));
            }
            deaths[x as usize] += 1;
        }
        let mut alive: u64 = ages.len() as u64;
        let mut qx = Vec::with_capacity(omega as usize + 1);
        for &d in &deaths {
            if alive > 0 {
                qx.push(d as f64 / alive as f64);
            } else {
                qx.push(1.0);
            }
            alive -= d.min(alive);
        }
        qx[omega as usize] = 1.0;
        Ok(LifeTable { omega, qx })
    }

    /// Build a table directly from one-year death probabilities
    /// `qx[0..=omega]`; the last entry is forced to 1.
    pub fn from_qx(mut qx: Vec<f64>) -> Result<Self> {
        if qx.is_empty() {
            return Err(Error::InvalidInput("empty qx vector".into()));
        }
        for (x, &q) in qx.iter().enumerate() {
            if !q.is_finite() || !(0.0..=1.0).contains(&q) {
                return Err(Error::Domain(format!("q_{x} = {q} outside [0, 1]")));
            }
        }
        let omega = (qx.len() - 1) as u32;
        *qx.last_mut().unwrap() = 1.0;
        Ok(LifeTable { omega, qx })
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }

    /// One-year death probability at age `x`.
    pub fn qx(&self, x: u32) -> Result<f64> {
        self.qx
            .get(x as usize)
            .copied()
            .ok_or_else(|| Error::Domain(format!("age {x} beyond omega {}", self.omega)))
    }

    /// Probability that a life aged `x` survives `t` further whole years:
    /// `ₜp_x = Π_{k=0}^{t-1} (1 - q_{x+k})`, with `₀p_x = 1`.
    ///
    /// Requires `x ≤ ω` and `x + t ≤ ω + 1`; the extreme case returns 0
    /// because `q_ω = 1`.
    pub fn tpx(&self, x: u32, t: u32) -> Result<f64> {
        if x > self.omega {
            return Err(Error::Domain(format!("age {x} beyond omega {}", self.omega)));
        }
        if x + t > self.omega + 1 {
            return Err(Error::Domain(format!(
                "survival horizon {x}+{t} beyond omega+1 = {}",
                self.omega + 1
            )));
        }
        Ok(self.survival_unchecked(x, t))
    }

    /// Like [`tpx`](Self::tpx) but treating any horizon past the table end as
    /// certain death. Useful in pricing sums that run past ω.
    pub fn tpx_or_zero(&self, x: u32, t: u32) -> f64 {
        if x > self.omega {
            return 0.0;
        }
        if x + t > self.omega + 1 {
            return 0.0;
        }
        self.survival_unchecked(x, t)
    }

    fn survival_unchecked(&self, x: u32, t: u32) -> f64 {
        let mut p = 1.0;
        for k in 0..t {
            p *= 1.0 - self.qx[(x + k) as usize];
            if p == 0.0 {
                break;
            }
        }
        p
    }

    /// Survivors column `l_x = l_0 · ₓp_0` with radix 100 000.
    pub fn lx(&self, x: u32) -> Result<f64> {
        if x > self.omega {
            return Err(Error::Domain(format!("age {x} beyond omega {}", self.omega)));
        }
        Ok(RADIX * self.survival_unchecked(0, x))
    }

    /// Curtate expectation of life `e_x = Σ_{t=1}^{ω-x+1} ₜp_x`.
    pub fn curtate_ex(&self, x: u32) -> Result<f64> {
        if x > self.omega {
            return Err(Error::Domain(format!("age {x} beyond omega {}", self.omega)));
        }
        let mut sum = 0.0;
        let mut p = 1.0;
        for k in x..=self.omega {
            p *= 1.0 - self.qx[k as usize];
            sum += p;
            if p == 0.0 {
                break;
            }
        }
        Ok(sum)
    }

    /// Write the table as CSV with columns `age,qx,lx,ex`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(Error::from)?;
        w.write_record(["age", "qx", "lx", "ex"])?;
        for x in 0..=self.omega {
            w.write_record(&[
                x.to_string(),
                self.qx[x as usize].to_string(),
                self.lx(x)?.to_string(),
                self.curtate_ex(x)?.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Read a table back from the CSV layout written by [`write_csv`](Self::write_csv).
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(Error::from)?;
        let mut qx = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let age: usize = rec
                .get(0)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidInput(format!("line {}: bad age", i + 2)))?;
            let q: f64 = rec
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidInput(format!("line {}: bad qx", i + 2)))?;
            if age != qx.len() {
                return Err(Error::InvalidInput(format!(
                    "line {}: ages must be contiguous from 0",
                    i + 2
                )));
            }
            qx.push(q);
        }
        LifeTable::from_qx(qx)
    }
}

/// A life table for lives that have already reached some base age, built
/// from a conditioned risk set. Internally the table is age-shifted: index
/// `k` of [`table`](Self::table) refers to age `base_age + k`.
#[derive(Debug, Clone)]
pub struct ConditionalTable {
    base_age: u32,
    n: usize,
    table: LifeTable,
}

impl ConditionalTable {
    /// Build from ages at death of the conditioned risk set; every age must
    /// be at least `base_age`.
    pub fn from_ages(ages: &[f64], base_age: u32, omega: u32) -> Result<Self> {
        if ages.is_empty() {
            return Err(Error::EmptyRiskSet(format!(
                "no lives in the risk set at age {base_age}"
            )));
        }
        if base_age > omega {
            return Err(Error::Domain(format!(
                "base age {base_age} beyond omega {omega}"
            )));
        }
        let mut shifted = Vec::with_capacity(ages.len());
        for &age in ages {
            if age < base_age as f64 {
                return Err(Error::InvalidInput(format!(
                    "age at death {age} below the base age {base_age}"
                )));
            }
            shifted.push(age - base_age as f64);
        }
        let table = LifeTable::from_ages_at_death(&shifted, omega - base_age)?;
        Ok(ConditionalTable {
            base_age,
            n: ages.len(),
            table,
        })
    }

    pub fn base_age(&self) -> u32 {
        self.base_age
    }

    /// Size of the conditioned risk set.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The age-shifted table (index 0 = base age).
    pub fn table(&self) -> &LifeTable {
        &self.table
    }

    /// Survival `ₖp` from the base age.
    pub fn kp(&self, k: u32) -> Result<f64> {
        self.table.tpx(0, k)
    }

    /// Curtate expectation of remaining life at the base age.
    pub fn expectation(&self) -> f64 {
        self.table.curtate_ex(0).expect("age 0 is always valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Hand-counted: four lives dying at 0.5, 1.5, 1.5, 3.0.
    // Age 0: 1 death among 4 alive; age 1: 2 among 3; age 2: 0 among 1;
    // age 3: the last one, and the table closes there.
    #[test]
    fn estimates_match_hand_counts() {
        let t = LifeTable::from_ages_at_death(&[0.5, 1.5, 1.5, 3.0], 3).unwrap();
        assert_relative_eq!(t.qx(0).unwrap(), 0.25);
        assert_relative_eq!(t.qx(1).unwrap(), 2.0 / 3.0);
        assert_relative_eq!(t.qx(2).unwrap(), 0.0);
        assert_relative_eq!(t.qx(3).unwrap(), 1.0);
    }

    #[test]
    fn survival_multiplies_complements() {
        let t = LifeTable::from_qx(vec![0.5, 0.5, 1.0]).unwrap();
        assert_relative_eq!(t.tpx(0, 2).unwrap(), 0.25);
        assert_relative_eq!(t.tpx(0, 0).unwrap(), 1.0);
        assert_relative_eq!(t.tpx(0, 3).unwrap(), 0.0);
        assert!(t.tpx(0, 4).is_err());
        assert!(t.tpx(3, 0).is_err());
    }

    #[test]
    fn curtate_expectation_sums_survival() {
        let t = LifeTable::from_qx(vec![0.5, 1.0]).unwrap();
        // e_0 = p_0 + 2p_0 = 0.5 + 0 = 0.5
        assert_relative_eq!(t.curtate_ex(0).unwrap(), 0.5);
    }

    #[test]
    fn survivors_column_starts_at_the_radix() {
        let t = LifeTable::from_ages_at_death(&[0.5, 1.5, 1.5, 3.0], 3).unwrap();
        assert_relative_eq!(t.lx(0).unwrap(), RADIX);
        assert_relative_eq!(t.lx(1).unwrap(), RADIX * 0.75);
    }

    #[test]
    fn empty_input_is_an_empty_risk_set() {
        assert!(matches!(
            LifeTable::from_ages_at_death(&[], 105),
            Err(Error::EmptyRiskSet(_))
        ));
    }

    #[test]
    fn ages_past_omega_are_rejected() {
        assert!(LifeTable::from_ages_at_death(&[106.5], 105).is_err());
    }

    #[test]
    fn conditional_table_shifts_ages() {
        // Lives dying at 20.5, 21.5, 23.0 conditioned at age 20.
        let c = ConditionalTable::from_ages(&[20.5, 21.5, 23.0], 20, 105).unwrap();
        assert_eq!(c.n(), 3);
        assert_relative_eq!(c.table().qx(0).unwrap(), 1.0 / 3.0);
        assert_relative_eq!(c.table().qx(1).unwrap(), 0.5);
        // The death at 23.0 happens during year-of-age 3, so it survives
        // years 0..=2: e = p + 2p + 3p = 2/3 + 1/3 + 1/3.
        assert_relative_eq!(c.expectation(), 4.0 / 3.0);
    }

    #[test]
    fn csv_round_trip_preserves_qx() {
        let t = LifeTable::from_ages_at_death(&[0.5, 1.5, 1.5, 3.0], 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        t.write_csv(&path).unwrap();
        let back = LifeTable::read_csv(&path).unwrap();
        assert_eq!(t, back);
    }

    proptest! {
        #[test]
        fn survivors_never_increase(qx in proptest::collection::vec(0.0f64..=1.0, 1..40)) {
            let t = LifeTable::from_qx(qx).unwrap();
            let mut prev = f64::INFINITY;
            for x in 0..=t.omega() {
                let l = t.lx(x).unwrap();
                prop_assert!(l <= prev + 1e-9);
                prev = l;
            }
        }

        #[test]
        fn survival_telescopes(
            qx in proptest::collection::vec(0.0f64..0.9, 4..30),
            x in 0u32..3,
            s in 0u32..3,
            t in 0u32..3,
        ) {
            let table = LifeTable::from_qx(qx).unwrap();
            prop_assume!(x + s + t <= table.omega());
            let lhs = table.tpx(x, s + t).unwrap();
            let rhs = table.tpx(x, s).unwrap() * table.tpx(x + s, t).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn random_cohorts_close_the_table(
            ages in proptest::collection::vec(0.0f64..50.0, 1..200)
        ) {
            let t = LifeTable::from_ages_at_death(&ages, 50).unwrap();
            prop_assert_eq!(t.qx(50).unwrap(), 1.0);
            // Everybody is dead by omega + 1.
            prop_assert_eq!(t.tpx(0, 51).unwrap(), 0.0);
        }
    }
}
