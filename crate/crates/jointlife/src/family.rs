//! Genealogical record ingestion: parsing the person CSV, sanitizing
//! implausible dates, and materializing the three analysis tables (couples,
//! child-parents, child-grandparents) with per-rule drop accounting.

use crate::dates::{DAYS_PER_YEAR, PartialDate};
use crate::error::{Error, Result};
use crate::lifetable::{ConditionalTable, MAX_AGE};
use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

/// Oldest age at death considered plausible; records beyond it (or with
/// death before birth) have their dates cleared during sanitization.
pub const MAX_PLAUSIBLE_AGE: f64 = 105.0;

/// Minimum age at death for someone listed as a parent or grandparent;
/// rows failing it are filtered out of the analysis tables.
pub const MIN_PARENT_AGE: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Male,
    Female,
}

impl std::str::FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m" | "male" => Ok(Sex::Male),
            "f" | "female" => Ok(Sex::Female),
            other => Err(Error::InvalidInput(format!("unknown sex {other:?}"))),
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::Male => "M",
            Sex::Female => "F",
        })
    }
}

/// One individual from the raw genealogy.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonRecord {
    pub id: String,
    pub sex: Sex,
    pub birth: Option<PartialDate>,
    pub death: Option<PartialDate>,
    pub father_id: Option<String>,
    pub mother_id: Option<String>,
}

impl PersonRecord {
    /// Both dates present (possibly partial — resolution fills the gaps).
    pub fn dates_complete(&self) -> bool {
        self.birth.is_some() && self.death.is_some()
    }

    /// Resolved (birth_days, death_days, age at death in years), if both
    /// dates are present.
    fn resolved_span(&self) -> Option<(i64, i64, f64)> {
        let b = self.birth?.resolve_days();
        let d = self.death?.resolve_days();
        Some((b, d, (d - b) as f64 / DAYS_PER_YEAR))
    }
}

/// Read the person CSV (`id,sex,birth,death,father_id,mother_id`; empty
/// field = missing; dates as `YYYY`, `YYYY-MM`, or `YYYY-MM-DD`).
/// Malformed rows fail with a line-numbered message.
pub fn read_persons_csv(path: &Path) -> Result<Vec<PersonRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                Error::io(path, std::io::Error::other(e.to_string()))
            }
            _ => Error::Csv(e),
        })?;
    {
        let headers = reader.headers()?;
        let expected = ["id", "sex", "birth", "death", "father_id", "mother_id"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::InvalidInput(format!(
                "expected header {}, got {}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }
    let mut records = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let fail = |msg: String| Error::InvalidInput(format!("line {line}: {msg}"));
        if row.len() != 6 {
            return Err(fail(format!("expected 6 fields, got {}", row.len())));
        }
        let id = row[0].trim().to_string();
        if id.is_empty() {
            return Err(fail("empty id".into()));
        }
        if let Some(first) = seen.insert(id.clone(), line) {
            return Err(fail(format!(
                "duplicate id {id:?} (first seen on line {first})"
            )));
        }
        let sex: Sex = row[1].trim().parse().map_err(|e| fail(format!("{e}")))?;
        let date = |field: &str, name: &str| -> Result<Option<PartialDate>> {
            let field = field.trim();
            if field.is_empty() {
                Ok(None)
            } else {
                PartialDate::parse(field)
                    .map(Some)
                    .map_err(|e| fail(format!("bad {name} date: {e}")))
            }
        };
        let opt_id = |field: &str| -> Option<String> {
            let field = field.trim();
            (!field.is_empty()).then(|| field.to_string())
        };
        records.push(PersonRecord {
            id,
            sex,
            birth: date(&row[2], "birth")?,
            death: date(&row[3], "death")?,
            father_id: opt_id(&row[4]),
            mother_id: opt_id(&row[5]),
        });
    }
    if records.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: no person records",
            path.display()
        )));
    }
    Ok(records)
}

/// Write person records in the exact schema `read_persons_csv` consumes.
pub fn write_persons_csv(path: &Path, records: &[PersonRecord]) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_record(["id", "sex", "birth", "death", "father_id", "mother_id"])?;
    let date = |d: &Option<PartialDate>| d.map(|d| d.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.id.as_str(),
            &r.sex.to_string(),
            &date(&r.birth),
            &date(&r.death),
            r.father_id.as_deref().unwrap_or(""),
            r.mother_id.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Counts of records whose dates were cleared during sanitization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SanitizeCounts {
    pub death_before_birth: usize,
    pub age_above_maximum: usize,
}

/// Clear the dates of records violating basic plausibility (death before
/// birth, or age at death above [`MAX_PLAUSIBLE_AGE`]). The record keeps
/// its identity and parent links so family structure survives; only its
/// dates are dropped, which excludes it from any age-based table.
pub fn sanitize(records: &mut [PersonRecord]) -> SanitizeCounts {
    let mut counts = SanitizeCounts::default();
    for rec in records {
        if let Some((_, _, age)) = rec.resolved_span() {
            if age < 0.0 {
                counts.death_before_birth += 1;
            } else if age > MAX_PLAUSIBLE_AGE {
                counts.age_above_maximum += 1;
            } else {
                continue;
            }
            rec.birth = None;
            rec.death = None;
        }
    }
    counts
}

// ===== Couples =====

/// A couple: two parents sharing at least one child, all four dates known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupleRow {
    pub father_id: String,
    pub mother_id: String,
    pub father_birth_days: i64,
    pub father_death_days: i64,
    pub mother_birth_days: i64,
    pub mother_death_days: i64,
    /// Father's age at death, fractional years.
    pub t_f: f64,
    /// Mother's age at death, fractional years.
    pub t_m: f64,
}

impl CoupleRow {
    /// Calendar birth year of the father — the cohort key.
    pub fn cohort_year(&self) -> i32 {
        days_to_date(self.father_birth_days).year()
    }
}

/// Drop accounting for a table build. `candidates` equals `kept` plus all
/// drop reasons; each candidate is counted under its first failing rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildCounts {
    pub candidates: usize,
    pub kept: usize,
    pub missing_person: usize,
    pub incomplete_dates: usize,
    pub age_filter: usize,
}

fn index_by_id(records: &[PersonRecord]) -> HashMap<&str, &PersonRecord> {
    records.iter().map(|r| (r.id.as_str(), r)).collect()
}

/// Build the couples table: one row per distinct (father, mother) pair with
/// at least one common child, both members having complete dates and ages
/// at death within `[15, 105]`.
pub fn build_couples(records: &[PersonRecord]) -> (Vec<CoupleRow>, BuildCounts) {
    let by_id = index_by_id(records);
    let mut pairs: BTreeMap<(&str, &str), ()> = BTreeMap::new();
    for rec in records {
        if let (Some(f), Some(m)) = (&rec.father_id, &rec.mother_id) {
            pairs.insert((f.as_str(), m.as_str()), ());
        }
    }
    let mut counts = BuildCounts {
        candidates: pairs.len(),
        ..BuildCounts::default()
    };
    let mut rows = Vec::new();
    for (father_id, mother_id) in pairs.keys() {
        let (Some(father), Some(mother)) = (by_id.get(father_id), by_id.get(mother_id)) else {
            counts.missing_person += 1;
            continue;
        };
        let (Some((fb, fd, t_f)), Some((mb, md, t_m))) =
            (father.resolved_span(), mother.resolved_span())
        else {
            counts.incomplete_dates += 1;
            continue;
        };
        if !(MIN_PARENT_AGE..=MAX_PLAUSIBLE_AGE).contains(&t_f)
            || !(MIN_PARENT_AGE..=MAX_PLAUSIBLE_AGE).contains(&t_m)
        {
            counts.age_filter += 1;
            continue;
        }
        counts.kept += 1;
        rows.push(CoupleRow {
            father_id: father_id.to_string(),
            mother_id: mother_id.to_string(),
            father_birth_days: fb,
            father_death_days: fd,
            mother_birth_days: mb,
            mother_death_days: md,
            t_f,
            t_m,
        });
    }
    (rows, counts)
}

// ===== Child-parents =====

/// A child together with both parents, all dates known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildParentsRow {
    pub child_id: String,
    pub child_sex: Sex,
    pub child_birth_days: i64,
    pub child_death_days: i64,
    /// Child's age at death, fractional years.
    pub t_c: f64,
    pub father_birth_days: i64,
    pub father_death_days: i64,
    pub t_f: f64,
    pub mother_birth_days: i64,
    pub mother_death_days: i64,
    pub t_m: f64,
}

impl ChildParentsRow {
    pub fn cohort_year(&self) -> i32 {
        days_to_date(self.child_birth_days).year()
    }

    /// Mean of the two parents' ages at death — the dependence axis used
    /// for child-vs-parents analyses.
    pub fn parent_mean(&self) -> f64 {
        0.5 * (self.t_f + self.t_m)
    }
}

/// Build the child-parents table: child and both parents with complete
/// dates, parents' ages at death in `[15, 105]`.
pub fn build_child_parents(records: &[PersonRecord]) -> (Vec<ChildParentsRow>, BuildCounts) {
    let by_id = index_by_id(records);
    let mut counts = BuildCounts::default();
    let mut rows = Vec::new();
    for rec in records {
        let (Some(fid), Some(mid)) = (&rec.father_id, &rec.mother_id) else {
            continue;
        };
        counts.candidates += 1;
        let (Some(father), Some(mother)) = (by_id.get(fid.as_str()), by_id.get(mid.as_str()))
        else {
            counts.missing_person += 1;
            continue;
        };
        let (Some((cb, cd, t_c)), Some((fb, fd, t_f)), Some((mb, md, t_m))) = (
            rec.resolved_span(),
            father.resolved_span(),
            mother.resolved_span(),
        ) else {
            counts.incomplete_dates += 1;
            continue;
        };
        if t_f < MIN_PARENT_AGE || t_m < MIN_PARENT_AGE {
            counts.age_filter += 1;
            continue;
        }
        counts.kept += 1;
        rows.push(ChildParentsRow {
            child_id: rec.id.clone(),
            child_sex: rec.sex,
            child_birth_days: cb,
            child_death_days: cd,
            t_c,
            father_birth_days: fb,
            father_death_days: fd,
            t_f,
            mother_birth_days: mb,
            mother_death_days: md,
            t_m,
        });
    }
    (rows, counts)
}

/// Parents' vital status at a given child age.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParentStatus {
    BothAlive,
    OnlyFather,
    OnlyMother,
    BothDead,
}

/// Is a person with this death date alive when the child reaches age `x`?
/// Strictly after: dying exactly on the child's x-th birthday counts as
/// dead at that age.
fn alive_at_child_age(death_days: i64, child_birth_days: i64, x: f64) -> bool {
    death_days as f64 > child_birth_days as f64 + x * DAYS_PER_YEAR
}

/// Parent status when the child reaches age `x`. The child must have
/// survived to `x` (otherwise it is not in the risk set at that age).
pub fn status_at_age(row: &ChildParentsRow, x: f64) -> Result<ParentStatus> {
    if row.t_c < x {
        return Err(Error::Domain(format!(
            "child {} died at {:.2}, before reaching age {x}",
            row.child_id, row.t_c
        )));
    }
    let father = alive_at_child_age(row.father_death_days, row.child_birth_days, x);
    let mother = alive_at_child_age(row.mother_death_days, row.child_birth_days, x);
    Ok(match (father, mother) {
        (true, true) => ParentStatus::BothAlive,
        (true, false) => ParentStatus::OnlyFather,
        (false, true) => ParentStatus::OnlyMother,
        (false, false) => ParentStatus::BothDead,
    })
}

// ===== Child-grandparents =====

/// One known grandparent: resolved dates and age at death.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrandparentEntry {
    pub birth_days: i64,
    pub death_days: i64,
    pub t: f64,
}

/// A child with at least one known grandparent. Slots are ordered:
/// father's father, father's mother, mother's father, mother's mother.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildGrandparentsRow {
    pub child_id: String,
    pub child_sex: Sex,
    pub child_birth_days: i64,
    pub child_death_days: i64,
    pub t_c: f64,
    pub grandparents: [Option<GrandparentEntry>; 4],
}

impl ChildGrandparentsRow {
    pub fn cohort_year(&self) -> i32 {
        days_to_date(self.child_birth_days).year()
    }

    pub fn all_four_known(&self) -> bool {
        self.grandparents.iter().all(Option::is_some)
    }

    /// Mean age at death over the known grandparents.
    pub fn grandparent_mean(&self) -> f64 {
        let known: Vec<f64> = self.grandparents.iter().flatten().map(|g| g.t).collect();
        known.iter().sum::<f64>() / known.len() as f64
    }

    /// How many of the known grandparents are alive when the child reaches
    /// age `x`.
    pub fn alive_count_at(&self, x: f64) -> Result<u8> {
        if self.t_c < x {
            return Err(Error::Domain(format!(
                "child {} died at {:.2}, before reaching age {x}",
                self.child_id, self.t_c
            )));
        }
        Ok(self
            .grandparents
            .iter()
            .flatten()
            .filter(|g| alive_at_child_age(g.death_days, self.child_birth_days, x))
            .count() as u8)
    }
}

/// Drop accounting for the grandparents table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrandparentBuildCounts {
    pub candidates: usize,
    pub kept: usize,
    pub child_incomplete: usize,
    pub no_qualifying_grandparent: usize,
}

/// Build the child-grandparents table. A candidate is any record with at
/// least one parent link; a row is kept when the child's dates are
/// complete and at least one grandparent has complete dates with age at
/// death ≥ 15. Unknown or under-age grandparents leave their slot empty.
pub fn build_child_grandparents(
    records: &[PersonRecord],
) -> (Vec<ChildGrandparentsRow>, GrandparentBuildCounts) {
    let by_id = index_by_id(records);
    let mut counts = GrandparentBuildCounts::default();
    let mut rows = Vec::new();
    let grandparent_entry = |person_id: &Option<String>,
                             pick: fn(&PersonRecord) -> &Option<String>|
     -> Option<GrandparentEntry> {
        let parent = by_id.get(person_id.as_deref()?)?;
        let gp = by_id.get(pick(parent).as_deref()?)?;
        let (birth_days, death_days, t) = gp.resolved_span()?;
        (t >= MIN_PARENT_AGE).then_some(GrandparentEntry {
            birth_days,
            death_days,
            t,
        })
    };
    for rec in records {
        if rec.father_id.is_none() && rec.mother_id.is_none() {
            continue;
        }
        counts.candidates += 1;
        let Some((cb, cd, t_c)) = rec.resolved_span() else {
            counts.child_incomplete += 1;
            continue;
        };
        let grandparents = [
            grandparent_entry(&rec.father_id, |p| &p.father_id),
            grandparent_entry(&rec.father_id, |p| &p.mother_id),
            grandparent_entry(&rec.mother_id, |p| &p.father_id),
            grandparent_entry(&rec.mother_id, |p| &p.mother_id),
        ];
        if grandparents.iter().all(Option::is_none) {
            counts.no_qualifying_grandparent += 1;
            continue;
        }
        counts.kept += 1;
        rows.push(ChildGrandparentsRow {
            child_id: rec.id.clone(),
            child_sex: rec.sex,
            child_birth_days: cb,
            child_death_days: cd,
            t_c,
            grandparents,
        });
    }
    (rows, counts)
}

// ===== Conditional tables =====

/// Conditioning event for family-status tables, evaluated when the subject
/// reaches the table's base age.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// No conditioning: everyone alive at the base age.
    Baseline,
    /// Exact parent status.
    Parents(ParentStatus),
    /// Exactly one parent alive (either one).
    ParentsOneAlive,
    /// Exactly this many grandparents alive, on the subsample of children
    /// whose four grandparents are all known.
    GrandparentsAlive(u8),
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Baseline => f.write_str("baseline"),
            Condition::Parents(ParentStatus::BothAlive) => f.write_str("both_alive"),
            Condition::Parents(ParentStatus::OnlyFather) => f.write_str("only_father"),
            Condition::Parents(ParentStatus::OnlyMother) => f.write_str("only_mother"),
            Condition::Parents(ParentStatus::BothDead) => f.write_str("both_dead"),
            Condition::ParentsOneAlive => f.write_str("one_alive"),
            Condition::GrandparentsAlive(k) => write!(f, "grandparents_alive_{k}"),
        }
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "baseline" | "none" => Ok(Condition::Baseline),
            "both_alive" => Ok(Condition::Parents(ParentStatus::BothAlive)),
            "only_father" => Ok(Condition::Parents(ParentStatus::OnlyFather)),
            "only_mother" => Ok(Condition::Parents(ParentStatus::OnlyMother)),
            "both_dead" => Ok(Condition::Parents(ParentStatus::BothDead)),
            "one_alive" => Ok(Condition::ParentsOneAlive),
            other => {
                if let Some(k) = other.strip_prefix("grandparents_alive_") {
                    let k: u8 = k.parse().map_err(|_| {
                        Error::InvalidInput(format!("bad grandparent count in {other:?}"))
                    })?;
                    if k > 4 {
                        return Err(Error::InvalidInput(
                            "at most 4 grandparents can be alive".into(),
                        ));
                    }
                    Ok(Condition::GrandparentsAlive(k))
                } else {
                    Err(Error::InvalidInput(format!("unknown condition {other:?}")))
                }
            }
        }
    }
}

/// Life table for children conditioned on parent status at age `x`.
pub fn conditional_table_parents(
    rows: &[ChildParentsRow],
    x: u32,
    condition: Condition,
) -> Result<ConditionalTable> {
    let xf = x as f64;
    let mut ages = Vec::new();
    for row in rows {
        if row.t_c < xf {
            continue;
        }
        let keep = match condition {
            Condition::Baseline => true,
            Condition::Parents(want) => status_at_age(row, xf)? == want,
            Condition::ParentsOneAlive => matches!(
                status_at_age(row, xf)?,
                ParentStatus::OnlyFather | ParentStatus::OnlyMother
            ),
            Condition::GrandparentsAlive(_) => {
                return Err(Error::InvalidInput(
                    "grandparent conditions need the child-grandparents table".into(),
                ));
            }
        };
        if keep {
            ages.push(row.t_c);
        }
    }
    ConditionalTable::from_ages(&ages, x, MAX_AGE).map_err(|e| match e {
        Error::EmptyRiskSet(_) => Error::EmptyRiskSet(format!(
            "no children aged {x} with parent condition {condition}"
        )),
        other => other,
    })
}

/// Baseline for grandparent conditions: every all-four-known child alive
/// at age `x`, regardless of how many grandparents survive.
pub fn grandparent_baseline_table(
    rows: &[ChildGrandparentsRow],
    x: u32,
) -> Result<ConditionalTable> {
    let xf = x as f64;
    let ages: Vec<f64> = rows
        .iter()
        .filter(|r| r.t_c >= xf && r.all_four_known())
        .map(|r| r.t_c)
        .collect();
    ConditionalTable::from_ages(&ages, x, MAX_AGE).map_err(|e| match e {
        Error::EmptyRiskSet(_) => Error::EmptyRiskSet(format!(
            "no children aged {x} with all four grandparents known"
        )),
        other => other,
    })
}

/// Life table for children conditioned on the number of living
/// grandparents at age `x`, within the all-four-known subsample.
pub fn conditional_table_grandparents(
    rows: &[ChildGrandparentsRow],
    x: u32,
    alive: u8,
) -> Result<ConditionalTable> {
    if alive > 4 {
        return Err(Error::InvalidInput(
            "at most 4 grandparents can be alive".into(),
        ));
    }
    let xf = x as f64;
    let mut ages = Vec::new();
    for row in rows {
        if row.t_c < xf || !row.all_four_known() {
            continue;
        }
        if row.alive_count_at(xf)? == alive {
            ages.push(row.t_c);
        }
    }
    ConditionalTable::from_ages(&ages, x, MAX_AGE).map_err(|e| match e {
        Error::EmptyRiskSet(_) => Error::EmptyRiskSet(format!(
            "no children aged {x} with exactly {alive} grandparents alive"
        )),
        other => other,
    })
}

// ===== Table CSV round trips =====

fn days_to_date(days: i64) -> NaiveDate {
    NaiveDate::from_num_days_from_ce_opt(days as i32)
        .expect("resolved day count is a valid date by construction")
}

fn days_to_iso(days: i64) -> String {
    days_to_date(days).to_string()
}

fn iso_to_days(text: &str) -> Result<i64> {
    Ok(PartialDate::parse(text)?.resolve_days())
}

fn open_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::Reader::from_path(path).map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))
}

pub fn write_couples_csv(path: &Path, rows: &[CoupleRow]) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_record([
        "father_id",
        "mother_id",
        "father_birth",
        "father_death",
        "mother_birth",
        "mother_death",
        "t_f",
        "t_m",
    ])?;
    for r in rows {
        w.write_record([
            r.father_id.as_str(),
            r.mother_id.as_str(),
            &days_to_iso(r.father_birth_days),
            &days_to_iso(r.father_death_days),
            &days_to_iso(r.mother_birth_days),
            &days_to_iso(r.mother_death_days),
            &format!("{:.6}", r.t_f),
            &format!("{:.6}", r.t_m),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_couples_csv(path: &Path) -> Result<Vec<CoupleRow>> {
    let mut reader = open_reader(path)?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() != 8 {
            return Err(Error::InvalidInput(format!(
                "{}: expected 8 columns, got {}",
                path.display(),
                rec.len()
            )));
        }
        let fb = iso_to_days(&rec[2])?;
        let fd = iso_to_days(&rec[3])?;
        let mb = iso_to_days(&rec[4])?;
        let md = iso_to_days(&rec[5])?;
        rows.push(CoupleRow {
            father_id: rec[0].to_string(),
            mother_id: rec[1].to_string(),
            father_birth_days: fb,
            father_death_days: fd,
            mother_birth_days: mb,
            mother_death_days: md,
            t_f: (fd - fb) as f64 / DAYS_PER_YEAR,
            t_m: (md - mb) as f64 / DAYS_PER_YEAR,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyRiskSet(format!(
            "{}: no couple rows",
            path.display()
        )));
    }
    Ok(rows)
}

pub fn write_child_parents_csv(path: &Path, rows: &[ChildParentsRow]) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_record([
        "child_id",
        "child_sex",
        "child_birth",
        "child_death",
        "father_birth",
        "father_death",
        "mother_birth",
        "mother_death",
    ])?;
    for r in rows {
        w.write_record([
            r.child_id.as_str(),
            &r.child_sex.to_string(),
            &days_to_iso(r.child_birth_days),
            &days_to_iso(r.child_death_days),
            &days_to_iso(r.father_birth_days),
            &days_to_iso(r.father_death_days),
            &days_to_iso(r.mother_birth_days),
            &days_to_iso(r.mother_death_days),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_child_parents_csv(path: &Path) -> Result<Vec<ChildParentsRow>> {
    let mut reader = open_reader(path)?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() != 8 {
            return Err(Error::InvalidInput(format!(
                "{}: expected 8 columns, got {}",
                path.display(),
                rec.len()
            )));
        }
        let days: Vec<i64> = (2..8).map(|i| iso_to_days(&rec[i])).collect::<Result<_>>()?;
        let age = |b: i64, d: i64| (d - b) as f64 / DAYS_PER_YEAR;
        rows.push(ChildParentsRow {
            child_id: rec[0].to_string(),
            child_sex: rec[1].parse()?,
            child_birth_days: days[0],
            child_death_days: days[1],
            t_c: age(days[0], days[1]),
            father_birth_days: days[2],
            father_death_days: days[3],
            t_f: age(days[2], days[3]),
            mother_birth_days: days[4],
            mother_death_days: days[5],
            t_m: age(days[4], days[5]),
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyRiskSet(format!(
            "{}: no child-parents rows",
            path.display()
        )));
    }
    Ok(rows)
}

pub fn write_child_grandparents_csv(path: &Path, rows: &[ChildGrandparentsRow]) -> Result<()> {
    let mut w = open_writer(path)?;
    let mut header = vec![
        "child_id".to_string(),
        "child_sex".to_string(),
        "child_birth".to_string(),
        "child_death".to_string(),
    ];
    for slot in ["gff", "gmf", "gfm", "gmm"] {
        header.push(format!("{slot}_birth"));
        header.push(format!("{slot}_death"));
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.child_id.clone(),
            r.child_sex.to_string(),
            days_to_iso(r.child_birth_days),
            days_to_iso(r.child_death_days),
        ];
        for slot in &r.grandparents {
            match slot {
                Some(g) => {
                    rec.push(days_to_iso(g.birth_days));
                    rec.push(days_to_iso(g.death_days));
                }
                None => {
                    rec.push(String::new());
                    rec.push(String::new());
                }
            }
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_child_grandparents_csv(path: &Path) -> Result<Vec<ChildGrandparentsRow>> {
    let mut reader = open_reader(path)?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() != 12 {
            return Err(Error::InvalidInput(format!(
                "{}: expected 12 columns, got {}",
                path.display(),
                rec.len()
            )));
        }
        let cb = iso_to_days(&rec[2])?;
        let cd = iso_to_days(&rec[3])?;
        let mut grandparents = [None; 4];
        for (slot, gp) in grandparents.iter_mut().enumerate() {
            let b = rec[4 + 2 * slot].trim();
            let d = rec[5 + 2 * slot].trim();
            match (b.is_empty(), d.is_empty()) {
                (true, true) => {}
                (false, false) => {
                    let birth_days = iso_to_days(b)?;
                    let death_days = iso_to_days(d)?;
                    *gp = Some(GrandparentEntry {
                        birth_days,
                        death_days,
                        t: (death_days - birth_days) as f64 / DAYS_PER_YEAR,
                    });
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "{}: grandparent slot {} has only one of birth/death",
                        path.display(),
                        slot
                    )));
                }
            }
        }
        rows.push(ChildGrandparentsRow {
            child_id: rec[0].to_string(),
            child_sex: rec[1].parse()?,
            child_birth_days: cb,
            child_death_days: cd,
            t_c: (cd - cb) as f64 / DAYS_PER_YEAR,
            grandparents,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyRiskSet(format!(
            "{}: no child-grandparents rows",
            path.display()
        )));
    }
    Ok(rows)
}

/// Write a conditional life table as CSV with the absolute-age layout
/// `age,qx,lx,ex,condition,risk_set_n`.
pub fn write_conditional_table_csv(
    path: &Path,
    table: &ConditionalTable,
    condition: Condition,
) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_record(["age", "qx", "lx", "ex", "condition", "risk_set_n"])?;
    let inner = table.table();
    let label = condition.to_string();
    let n = table.n().to_string();
    for k in 0..=inner.omega() {
        w.write_record(&[
            (table.base_age() + k).to_string(),
            inner.qx(k)?.to_string(),
            inner.lx(k)?.to_string(),
            inner.curtate_ex(k)?.to_string(),
            label.clone(),
            n.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Summary of a full ingest run, serialized to JSON next to the tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestSummary {
    pub persons: usize,
    pub sanitized: SanitizeCounts,
    pub couples: BuildCounts,
    pub child_parents: BuildCounts,
    pub child_grandparents: GrandparentBuildCounts,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write as _;

    fn date(y: i32, m: u8, d: u8) -> Option<PartialDate> {
        Some(PartialDate::new(y, Some(m), Some(d)).unwrap())
    }

    fn person(
        id: &str,
        sex: Sex,
        birth: Option<PartialDate>,
        death: Option<PartialDate>,
        father: Option<&str>,
        mother: Option<&str>,
    ) -> PersonRecord {
        PersonRecord {
            id: id.into(),
            sex,
            birth,
            death,
            father_id: father.map(String::from),
            mother_id: mother.map(String::from),
        }
    }

    /// A small three-generation family: grandparents GF/GM (father's side),
    /// parents F/M, children C1/C2.
    fn sample_family() -> Vec<PersonRecord> {
        vec![
            person("GF", Sex::Male, date(1775, 1, 1), date(1840, 1, 1), None, None),
            person("GM", Sex::Female, date(1780, 1, 1), date(1850, 6, 1), None, None),
            person(
                "F",
                Sex::Male,
                date(1800, 3, 1),
                date(1870, 3, 1),
                Some("GF"),
                Some("GM"),
            ),
            person("M", Sex::Female, date(1805, 5, 1), date(1880, 5, 1), None, None),
            person(
                "C1",
                Sex::Male,
                date(1830, 1, 1),
                date(1900, 1, 1),
                Some("F"),
                Some("M"),
            ),
            person(
                "C2",
                Sex::Female,
                date(1832, 1, 1),
                date(1835, 1, 1),
                Some("F"),
                Some("M"),
            ),
        ]
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn reads_a_valid_person_csv() {
        let f = write_csv(
            "id,sex,birth,death,father_id,mother_id\n\
             P1,M,1800,1870-03,,\n\
             P2,F,1805-05-01,1880-05-01,P1,\n",
        );
        let recs = read_persons_csv(f.path()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].birth.unwrap().month(), None);
        assert_eq!(recs[0].death.unwrap().month(), Some(3));
        assert_eq!(recs[1].father_id.as_deref(), Some("P1"));
        assert_eq!(recs[1].mother_id, None);
    }

    #[test]
    fn malformed_date_reports_its_line() {
        let f = write_csv(
            "id,sex,birth,death,father_id,mother_id\n\
             P1,M,1800,1870,,\n\
             P2,F,1805-13-01,1880,,\n",
        );
        let err = read_persons_csv(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "missing line number: {msg}");
        assert!(msg.contains("birth"), "missing field name: {msg}");
    }

    #[test]
    fn empty_and_header_only_files_are_rejected() {
        let f = write_csv("id,sex,birth,death,father_id,mother_id\n");
        assert!(read_persons_csv(f.path()).is_err());
        let g = write_csv("");
        assert!(read_persons_csv(g.path()).is_err());
    }

    #[test]
    fn duplicate_ids_are_rejected_with_both_lines() {
        let f = write_csv(
            "id,sex,birth,death,father_id,mother_id\n\
             P1,M,1800,1870,,\n\
             P1,F,1805,1880,,\n",
        );
        let msg = read_persons_csv(f.path()).unwrap_err().to_string();
        assert!(msg.contains("line 3") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn wrong_header_is_rejected() {
        let f = write_csv("id,sex,born,died,father_id,mother_id\nP1,M,1800,1870,,\n");
        assert!(read_persons_csv(f.path()).is_err());
    }

    #[test]
    fn sanitize_clears_implausible_dates() {
        let mut recs = vec![
            person("A", Sex::Male, date(1850, 1, 1), date(1840, 1, 1), None, None),
            person("B", Sex::Male, date(1800, 1, 1), date(1910, 1, 1), None, None),
            person("C", Sex::Female, date(1800, 1, 1), date(1870, 1, 1), None, None),
        ];
        let counts = sanitize(&mut recs);
        assert_eq!(counts.death_before_birth, 1);
        assert_eq!(counts.age_above_maximum, 1);
        assert!(recs[0].birth.is_none() && recs[0].death.is_none());
        assert!(recs[1].birth.is_none() && recs[1].death.is_none());
        assert!(recs[2].dates_complete());
    }

    #[test]
    fn couples_require_a_common_child_and_full_dates() {
        let recs = sample_family();
        let (rows, counts) = build_couples(&recs);
        // Two candidate pairs: (GF,GM) and (F,M); both qualify.
        assert_eq!(counts.candidates, 2);
        assert_eq!(rows.len(), 2);
        assert_eq!(counts.kept, 2);
        let fm = rows.iter().find(|r| r.father_id == "F").unwrap();
        assert_relative_eq!(fm.t_f, 70.0, epsilon = 0.01);
        assert_relative_eq!(fm.t_m, 75.0, epsilon = 0.01);
    }

    #[test]
    fn couple_with_missing_mother_death_is_dropped_and_counted() {
        let mut recs = sample_family();
        recs.iter_mut().find(|r| r.id == "M").unwrap().death = None;
        let (rows, counts) = build_couples(&recs);
        assert_eq!(rows.len(), 1, "only the grandparent couple remains");
        assert_eq!(counts.incomplete_dates, 1);
        assert_eq!(
            counts.kept + counts.missing_person + counts.incomplete_dates + counts.age_filter,
            counts.candidates,
            "drop accounting must conserve candidates"
        );
    }

    #[test]
    fn several_children_still_give_one_couple_row() {
        let (rows, _) = build_couples(&sample_family());
        assert_eq!(
            rows.iter().filter(|r| r.father_id == "F").count(),
            1,
            "C1 and C2 share parents"
        );
    }

    #[test]
    fn under_age_parent_is_filtered() {
        let mut recs = sample_family();
        // Mother dies at 12.
        recs.iter_mut().find(|r| r.id == "M").unwrap().death = date(1817, 5, 1);
        let (rows, counts) = build_couples(&recs);
        assert_eq!(rows.len(), 1);
        assert_eq!(counts.age_filter, 1);
    }

    #[test]
    fn build_couples_is_order_independent() {
        let recs = sample_family();
        let (mut a, _) = build_couples(&recs);
        let mut reversed: Vec<PersonRecord> = recs.into_iter().rev().collect();
        reversed.rotate_left(2);
        let (mut b, _) = build_couples(&reversed);
        a.sort_by(|x, y| x.father_id.cmp(&y.father_id));
        b.sort_by(|x, y| x.father_id.cmp(&y.father_id));
        assert_eq!(a, b);
    }

    #[test]
    fn child_parents_rows_need_everyone_complete() {
        let (rows, counts) = build_child_parents(&sample_family());
        // Candidates: F (via GF/GM), C1, C2.
        assert_eq!(counts.candidates, 3);
        assert_eq!(rows.len(), 3);
        let c1 = rows.iter().find(|r| r.child_id == "C1").unwrap();
        assert_relative_eq!(c1.t_c, 70.0, epsilon = 0.01);
        assert_relative_eq!(c1.parent_mean(), 72.5, epsilon = 0.01);

        let mut broken = sample_family();
        broken.iter_mut().find(|r| r.id == "M").unwrap().death = None;
        let (rows, counts) = build_child_parents(&broken);
        // F still qualifies as a child of GF/GM; C1 and C2 lose their
        // mother's death date.
        assert_eq!(rows.len(), 1);
        assert_eq!(counts.incomplete_dates, 2);
    }

    #[test]
    fn status_at_age_walks_through_both_deaths() {
        // Child born 1830; father dies when child is 25, mother when 45.
        let row = ChildParentsRow {
            child_id: "C".into(),
            child_sex: Sex::Male,
            child_birth_days: 0,
            child_death_days: (80.0 * DAYS_PER_YEAR) as i64,
            t_c: 80.0,
            father_birth_days: -10_000,
            father_death_days: (25.0 * DAYS_PER_YEAR) as i64 + 1,
            t_f: 52.0,
            mother_birth_days: -9_000,
            mother_death_days: (45.0 * DAYS_PER_YEAR) as i64 + 1,
            t_m: 70.0,
        };
        assert_eq!(status_at_age(&row, 20.0).unwrap(), ParentStatus::BothAlive);
        assert_eq!(status_at_age(&row, 30.0).unwrap(), ParentStatus::OnlyMother);
        assert_eq!(status_at_age(&row, 50.0).unwrap(), ParentStatus::BothDead);
        assert!(status_at_age(&row, 81.0).is_err(), "child left the risk set");
    }

    #[test]
    fn dying_exactly_on_the_birthday_counts_as_dead() {
        let row = ChildParentsRow {
            child_id: "C".into(),
            child_sex: Sex::Female,
            child_birth_days: 0,
            child_death_days: (60.0 * DAYS_PER_YEAR) as i64,
            t_c: 60.0,
            father_birth_days: 0,
            father_death_days: (20.0 * DAYS_PER_YEAR) as i64, // = birthday boundary
            t_f: 20.0,
            mother_birth_days: 0,
            mother_death_days: (90.0 * DAYS_PER_YEAR) as i64,
            t_m: 90.0,
        };
        assert_eq!(status_at_age(&row, 20.0).unwrap(), ParentStatus::OnlyMother);
    }

    #[test]
    fn grandparent_rows_keep_partial_slots() {
        let (rows, counts) = build_child_grandparents(&sample_family());
        // Candidates: F, C1, C2. F has no known grandparents (GF/GM have no
        // parent links), so only C1 and C2 qualify, each knowing the two
        // paternal grandparents.
        assert_eq!(counts.candidates, 3);
        assert_eq!(counts.no_qualifying_grandparent, 1);
        assert_eq!(rows.len(), 2);
        let c1 = rows.iter().find(|r| r.child_id == "C1").unwrap();
        assert!(c1.grandparents[0].is_some() && c1.grandparents[1].is_some());
        assert!(c1.grandparents[2].is_none() && c1.grandparents[3].is_none());
        assert!(!c1.all_four_known());
        assert_relative_eq!(c1.grandparent_mean(), (65.0 + 70.42) / 2.0, epsilon = 0.01);
    }

    #[test]
    fn zero_known_grandparents_drops_the_row() {
        let mut recs = sample_family();
        recs.iter_mut().find(|r| r.id == "GF").unwrap().death = None;
        recs.iter_mut().find(|r| r.id == "GM").unwrap().birth = None;
        let (rows, counts) = build_child_grandparents(&recs);
        assert!(rows.is_empty());
        assert_eq!(counts.no_qualifying_grandparent, 3);
    }

    /// Synthetic child-parents rows with built-in positive dependence:
    /// children of long-lived parents live longer.
    fn dependent_rows() -> Vec<ChildParentsRow> {
        let mut rows = Vec::new();
        for i in 0..60 {
            let parent_t = 40.0 + (i % 30) as f64; // 40..69
            let child_t = 30.0 + (parent_t - 40.0) * 1.5 + (i % 7) as f64; // 30..77
            rows.push(ChildParentsRow {
                child_id: format!("K{i}"),
                child_sex: if i % 2 == 0 { Sex::Male } else { Sex::Female },
                child_birth_days: 0,
                child_death_days: (child_t * DAYS_PER_YEAR) as i64,
                t_c: child_t,
                father_birth_days: -(25.0 * DAYS_PER_YEAR) as i64,
                father_death_days: ((parent_t - 25.0) * DAYS_PER_YEAR) as i64,
                t_f: parent_t,
                mother_birth_days: -(22.0 * DAYS_PER_YEAR) as i64,
                mother_death_days: ((parent_t + 2.0 - 22.0) * DAYS_PER_YEAR) as i64,
                t_m: parent_t + 2.0,
            });
        }
        rows
    }

    #[test]
    fn conditional_tables_reflect_the_built_in_dependence() {
        let rows = dependent_rows();
        let alive = conditional_table_parents(&rows, 30, Condition::Parents(ParentStatus::BothAlive))
            .unwrap();
        let dead = conditional_table_parents(&rows, 30, Condition::Parents(ParentStatus::BothDead))
            .unwrap();
        assert!(
            alive.expectation() > dead.expectation(),
            "children of surviving parents should outlive the others: {} vs {}",
            alive.expectation(),
            dead.expectation()
        );
    }

    #[test]
    fn parent_conditions_partition_the_baseline_risk_set() {
        let rows = dependent_rows();
        let x = 32;
        let baseline = conditional_table_parents(&rows, x, Condition::Baseline).unwrap();
        let mut total = 0;
        for status in [
            ParentStatus::BothAlive,
            ParentStatus::OnlyFather,
            ParentStatus::OnlyMother,
            ParentStatus::BothDead,
        ] {
            if let Ok(t) = conditional_table_parents(&rows, x, Condition::Parents(status)) {
                total += t.n();
            }
        }
        assert_eq!(total, baseline.n());
    }

    #[test]
    fn couples_csv_round_trips() {
        let (rows, _) = build_couples(&sample_family());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("couples.csv");
        write_couples_csv(&path, &rows).unwrap();
        let back = read_couples_csv(&path).unwrap();
        assert_eq!(rows.len(), back.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.father_id, b.father_id);
            assert_eq!(a.father_birth_days, b.father_birth_days);
            assert_relative_eq!(a.t_f, b.t_f, epsilon = 1e-9);
        }
    }

    #[test]
    fn child_tables_csv_round_trip() {
        let (rows, _) = build_child_parents(&sample_family());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("child_parents.csv");
        write_child_parents_csv(&path, &rows).unwrap();
        let back = read_child_parents_csv(&path).unwrap();
        assert_eq!(rows, back);

        let (grows, _) = build_child_grandparents(&sample_family());
        let gpath = dir.path().join("child_grandparents.csv");
        write_child_grandparents_csv(&gpath, &grows).unwrap();
        let gback = read_child_grandparents_csv(&gpath).unwrap();
        assert_eq!(grows, gback);
    }

    #[test]
    fn person_csv_write_read_round_trip() {
        let mut recs = sample_family();
        recs[0].death = None; // exercise an empty date field
        recs[1].birth = Some(PartialDate::new(1780, Some(6), None).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("persons.csv");
        write_persons_csv(&path, &recs).unwrap();
        let back = read_persons_csv(&path).unwrap();
        assert_eq!(recs, back);
    }

    #[test]
    fn condition_strings_round_trip() {
        for cond in [
            Condition::Baseline,
            Condition::Parents(ParentStatus::BothAlive),
            Condition::Parents(ParentStatus::OnlyFather),
            Condition::Parents(ParentStatus::OnlyMother),
            Condition::Parents(ParentStatus::BothDead),
            Condition::ParentsOneAlive,
            Condition::GrandparentsAlive(3),
        ] {
            let text = cond.to_string();
            assert_eq!(text.parse::<Condition>().unwrap(), cond, "{text}");
        }
        assert!("grandparents_alive_5".parse::<Condition>().is_err());
        assert!("nonsense".parse::<Condition>().is_err());
    }
}
