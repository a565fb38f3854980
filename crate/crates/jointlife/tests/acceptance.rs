//! Acceptance gate: ten checks covering copula soundness, dependence
//! statistics, pricing correctness, law fitting, and end-to-end
//! reproducibility of the command-line pipeline.
//!
//! Each criterion prints exactly one `criterion N PASS/FAIL: ...` line;
//! run with `--nocapture` to see the lines when everything passes. The
//! single test fails if any criterion fails.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use jointlife::copulas::{self, pseudo_observations, Copula, CopulaFamily};
use jointlife::dependence::{pqd_test, spearman};
use jointlife::family::{build_child_parents, conditional_table_parents, Condition, ParentStatus};
use jointlife::laws::{
    empirical_rates, fit, simulate_lifetimes, FitOptions, LawParams, ObservedRate,
};
use jointlife::lifetable::{LifeTable, MAX_AGE};
use jointlife::pricing::{
    endowment, life_annuity, single_life_value, term_insurance, whole_life_insurance, Discount,
    JointModel, Product,
};
use jointlife::synthgen::{generate, GenConfig};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

// ===== Pinned tolerances and budgets =====

/// Criterion 1: allowed slack around the pointwise copula bounds.
const FRECHET_SLACK: f64 = 1e-9;
const FRECHET_BUDGET: Duration = Duration::from_secs(10);

/// Criterion 2: sample-Spearman window and refit window for Frank 3.367.
const SPEARMAN_WINDOW: (f64, f64) = (0.47, 0.53);
const FRANK_REFIT_WINDOW: (f64, f64) = (3.1, 3.65);
const FRANK_BUDGET: Duration = Duration::from_secs(30);

/// Criterion 3: PQD test power and level.
const PQD_POWER_P: f64 = 0.01;
const PQD_COMONOTONE_P: f64 = 0.5;
const PQD_LEVEL_WINDOW: (f64, f64) = (0.02, 0.09);
const PQD_RUNS: usize = 200;
const PQD_BUDGET: Duration = Duration::from_secs(300);

/// Criterion 4: pricing vs the exhaustive enumeration oracle.
const ORACLE_TOL: f64 = 1e-12;
const ORACLE_BUDGET: Duration = Duration::from_secs(5);

/// Criterion 5: annuity-insurance identity.
const IDENTITY_TOL: f64 = 1e-10;

/// Criterion 6: bound orderings.
const BOUNDS_BUDGET: Duration = Duration::from_secs(10);

/// Criterion 7: widow-ratio monotonicity slack (ratios are smooth in age).
const WIDOW_TREND_SLACK: f64 = 1e-9;

/// Criterion 8: minimum risk set per conditional table, and how many ages
/// must qualify for the check to be meaningful.
const MIN_RISK_SET: usize = 500;
const MIN_QUALIFYING_AGES: usize = 10;

/// Criterion 9: relative parameter-recovery tolerances.
const RECOVERY_TOL: f64 = 0.05;
const RECOVERY_TOL_HP_HUMP: f64 = 0.15;
const RECOVERY_BUDGET: Duration = Duration::from_secs(120);

/// Criterion 10: whole-pipeline budget.
const PIPELINE_BUDGET: Duration = Duration::from_secs(600);

#[test]
fn acceptance_criteria() {
    let checks: Vec<(u32, &str, fn() -> Result<String, String>)> = vec![
        (1, "Frechet-Hoeffding bounds", criterion_1),
        (2, "Frank dependence anchor", criterion_2),
        (3, "PQD test power and level", criterion_3),
        (4, "pricing enumeration oracle", criterion_4),
        (5, "annuity-insurance identity", criterion_5),
        (6, "dependence bound orderings", criterion_6),
        (7, "widow ratio below independence", criterion_7),
        (8, "conditional product orderings", criterion_8),
        (9, "mortality-law round trip", criterion_9),
        (10, "pipeline determinism", criterion_10),
    ];
    let mut failures = Vec::new();
    for (number, name, check) in checks {
        match check() {
            Ok(detail) => println!("criterion {number} PASS ({name}): {detail}"),
            Err(detail) => {
                println!("criterion {number} FAIL ({name}): {detail}");
                failures.push(number);
            }
        }
    }
    assert!(failures.is_empty(), "failed acceptance criteria: {failures:?}");
}

fn budget(start: Instant, limit: Duration) -> Result<String, String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(format!("{:.1}s", took.as_secs_f64()))
    } else {
        Err(format!("took {:.1}s, budget {:.0}s", took.as_secs_f64(), limit.as_secs_f64()))
    }
}

// ===== 1: every family stays inside the Frechet-Hoeffding bounds =====

fn criterion_1() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    let sample = Copula::parametric(CopulaFamily::Frank, 3.367)
        .and_then(|c| c.sample(300, &mut rng))
        .map_err(|e| e.to_string())?;
    // Data-driven copulas are built from rank pseudo-observations, as in
    // any fitting pipeline; the raw sample is not itself a copula sample
    // restricted to a grid-aligned support.
    let us: Vec<f64> = sample.iter().map(|p| p.0).collect();
    let vs: Vec<f64> = sample.iter().map(|p| p.1).collect();
    let pseudo = pseudo_observations(&us, &vs).map_err(|e| e.to_string())?;

    let mut copulas: Vec<(String, Copula)> = vec![
        ("independent".into(), Copula::Independent),
        ("comonotone".into(), Copula::Comonotone),
        (
            "empirical".into(),
            Copula::empirical(pseudo.clone()).map_err(|e| e.to_string())?,
        ),
        (
            "smoothed_empirical".into(),
            Copula::smoothed_empirical(&pseudo).map_err(|e| e.to_string())?,
        ),
    ];
    let grids: [(CopulaFamily, &[f64]); 4] = [
        (CopulaFamily::Clayton, &[0.0, 0.5, 2.0, 8.0, 30.0]),
        (CopulaFamily::Gumbel, &[1.0, 1.5, 3.0, 10.0, 30.0]),
        (CopulaFamily::Frank, &[-50.0, -8.0, -1.0, 1e-7, 3.367, 8.0, 50.0]),
        (CopulaFamily::Gaussian, &[-0.999, -0.6, 0.0, 0.6, 0.999]),
    ];
    for (family, thetas) in grids {
        for &theta in thetas {
            let copula = Copula::parametric(family, theta).map_err(|e| e.to_string())?;
            copulas.push((format!("{family} theta={theta}"), copula));
        }
    }

    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for (label, copula) in &copulas {
        for i in 0..=100u32 {
            let u = i as f64 / 100.0;
            for j in 0..=100u32 {
                let v = j as f64 / 100.0;
                let c = copula.cdf(u, v);
                let lower = (u + v - 1.0).max(0.0);
                let upper = u.min(v);
                let violation = (lower - c).max(c - upper).max(0.0);
                worst = worst.max(violation);
                if violation > FRECHET_SLACK {
                    return Err(format!(
                        "{label} violates bounds at ({u}, {v}): C = {c}, \
                         allowed [{lower}, {upper}] +/- {FRECHET_SLACK}"
                    ));
                }
                checked += 1;
            }
        }
    }
    let took = budget(start, FRECHET_BUDGET)?;
    Ok(format!(
        "{} copulas x 101x101 grid ({checked} evaluations), worst violation {worst:.2e}, {took}",
        copulas.len()
    ))
}

// ===== 2: Frank theta=3.367 gives Spearman ~0.5 and refits to theta =====

fn criterion_2() -> Result<String, String> {
    let start = Instant::now();
    let copula = Copula::parametric(CopulaFamily::Frank, 3.367).map_err(|e| e.to_string())?;
    let mut rng = ChaCha12Rng::seed_from_u64(202);
    let sample = copula.sample(10_000, &mut rng).map_err(|e| e.to_string())?;
    let us: Vec<f64> = sample.iter().map(|p| p.0).collect();
    let vs: Vec<f64> = sample.iter().map(|p| p.1).collect();

    let rho = spearman(&us, &vs).map_err(|e| e.to_string())?;
    if !(SPEARMAN_WINDOW.0..=SPEARMAN_WINDOW.1).contains(&rho) {
        return Err(format!("sample Spearman {rho:.4} outside {SPEARMAN_WINDOW:?}"));
    }

    let pseudo = pseudo_observations(&us, &vs).map_err(|e| e.to_string())?;
    let refit = copulas::fit(CopulaFamily::Frank, &pseudo).map_err(|e| e.to_string())?;
    let theta = refit.copula.theta().ok_or("refit returned no parameter")?;
    if !(FRANK_REFIT_WINDOW.0..=FRANK_REFIT_WINDOW.1).contains(&theta) {
        return Err(format!("refit theta {theta:.4} outside {FRANK_REFIT_WINDOW:?}"));
    }
    let took = budget(start, FRANK_BUDGET)?;
    Ok(format!("n=10000: Spearman {rho:.4}, refit theta {theta:.4}, {took}"))
}

// ===== 3: PQD test rejects negative dependence, keeps positive, holds level =====

fn criterion_3() -> Result<String, String> {
    let start = Instant::now();
    let n = 500;
    let (grid, bootstraps) = (100, 500);

    let mut rng = ChaCha12Rng::seed_from_u64(303);
    let counter: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let counter_mate: Vec<f64> = counter.iter().map(|u| 1.0 - u).collect();
    let pseudo = pseudo_observations(&counter, &counter_mate).map_err(|e| e.to_string())?;
    let neg = pqd_test(&pseudo, grid, bootstraps, 1).map_err(|e| e.to_string())?;
    if neg.p_value >= PQD_POWER_P {
        return Err(format!(
            "countermonotone sample not rejected: p = {} >= {PQD_POWER_P}",
            neg.p_value
        ));
    }

    let como: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let pseudo = pseudo_observations(&como, &como.clone()).map_err(|e| e.to_string())?;
    let pos = pqd_test(&pseudo, grid, bootstraps, 2).map_err(|e| e.to_string())?;
    if pos.p_value <= PQD_COMONOTONE_P {
        return Err(format!(
            "comonotone sample suspiciously rejected: p = {} <= {PQD_COMONOTONE_P}",
            pos.p_value
        ));
    }

    let mut rejections = 0usize;
    for run in 0..PQD_RUNS {
        let mut rng = ChaCha12Rng::seed_from_u64(9_000 + run as u64);
        let xs: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let pseudo = pseudo_observations(&xs, &ys).map_err(|e| e.to_string())?;
        let result = pqd_test(&pseudo, grid, bootstraps, 10_000 + run as u64)
            .map_err(|e| e.to_string())?;
        if result.p_value < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / PQD_RUNS as f64;
    if !(PQD_LEVEL_WINDOW.0..=PQD_LEVEL_WINDOW.1).contains(&rate) {
        return Err(format!(
            "independent rejection rate {rate:.3} ({rejections}/{PQD_RUNS}) outside {PQD_LEVEL_WINDOW:?}"
        ));
    }
    let took = budget(start, PQD_BUDGET)?;
    Ok(format!(
        "countermonotone p = {:.3}, comonotone p = {:.3}, level {rate:.3} over {PQD_RUNS} runs, {took}",
        neg.p_value, pos.p_value
    ))
}

// ===== 4: product values match exhaustive outcome enumeration =====

/// Present value of one more year's payments: nu^t for t in [1, k∧h].
fn annuity_payoff(k: u32, h: u32, nu: f64) -> f64 {
    (1..=k.min(h)).map(|t| nu.powi(t as i32)).sum()
}

fn single_life_oracle(
    table: &LifeTable,
    x: u32,
    product: Product,
    n: u32,
    disc: &Discount,
    horizon: u32,
) -> f64 {
    let nu = disc.nu();
    let span = table.omega() - x;
    let mut value = 0.0;
    for k in 0..=span {
        // Curtate lifetime K = k: survives k whole years, dies in year k+1.
        let p_k = table.tpx_or_zero(x, k) - table.tpx_or_zero(x, k + 1);
        let payoff = match product {
            Product::Annuity => annuity_payoff(k, horizon, nu),
            Product::WholeLife => {
                if k < horizon {
                    nu.powi(k as i32 + 1)
                } else {
                    0.0
                }
            }
            Product::Term => {
                if k < n {
                    nu.powi(k as i32 + 1)
                } else {
                    0.0
                }
            }
            Product::Endowment => {
                if k >= n {
                    nu.powi(n as i32)
                } else {
                    0.0
                }
            }
            _ => unreachable!("joint products use the bivariate oracle"),
        };
        value += p_k * payoff;
    }
    value
}

fn joint_oracle(
    father: &LifeTable,
    mother: &LifeTable,
    copula: &Copula,
    x_f: u32,
    x_m: u32,
    product: Product,
    disc: &Discount,
    horizon: u32,
) -> Result<f64, String> {
    let nu = disc.nu();
    let span_f = father.omega() - x_f;
    let span_m = mother.omega() - x_m;
    // Joint survival G(j, k) = C(P(K_f >= j), P(K_m >= k)); the cell mass
    // P(K_f = j, K_m = k) is its rectangle difference.
    let g = |j: u32, k: u32| {
        copula.cdf(father.tpx_or_zero(x_f, j), mother.tpx_or_zero(x_m, k))
    };
    let mut value = 0.0;
    let mut total = 0.0;
    for j in 0..=span_f {
        for k in 0..=span_m {
            let mass = g(j, k) - g(j + 1, k) - g(j, k + 1) + g(j + 1, k + 1);
            total += mass;
            if mass == 0.0 {
                continue;
            }
            let payoff = match product {
                Product::Joint => annuity_payoff(j.min(k), horizon, nu),
                Product::LastSurvivor => annuity_payoff(j.max(k), horizon, nu),
                // Widow: paid at t while the mother is alive (k >= t) and
                // the father is already dead (j < t).
                Product::Widow => (j + 1..=k.min(horizon)).map(|t| nu.powi(t as i32)).sum(),
                _ => unreachable!("single-life products use the univariate oracle"),
            };
            value += mass * payoff;
        }
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(format!("oracle cell masses sum to {total}, not 1"));
    }
    Ok(value)
}

fn random_small_table(rng: &mut ChaCha12Rng) -> LifeTable {
    let omega = rng.random_range(2..=5u32);
    let mut qx: Vec<f64> = (0..omega).map(|_| rng.random_range(0.05..0.9)).collect();
    qx.push(1.0);
    LifeTable::from_qx(qx).expect("random probabilities form a valid table")
}

fn criterion_4() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(404);
    let tables: Vec<LifeTable> = (0..20).map(|_| random_small_table(&mut rng)).collect();
    let rates = [0.01, 0.03, 0.08];
    let copulas = [
        Copula::Independent,
        Copula::Comonotone,
        Copula::parametric(CopulaFamily::Clayton, 1.5).map_err(|e| e.to_string())?,
        Copula::parametric(CopulaFamily::Frank, 2.5).map_err(|e| e.to_string())?,
        Copula::parametric(CopulaFamily::Gumbel, 2.0).map_err(|e| e.to_string())?,
        Copula::parametric(CopulaFamily::Gaussian, 0.5).map_err(|e| e.to_string())?,
    ];
    let horizon = 40;
    let mut comparisons = 0usize;
    let mut worst: f64 = 0.0;
    let mut check = |label: String, got: f64, want: f64| -> Result<(), String> {
        let diff = (got - want).abs();
        worst = worst.max(diff);
        comparisons += 1;
        if diff > ORACLE_TOL {
            return Err(format!("{label}: library {got:.15} vs oracle {want:.15} (diff {diff:.2e})"));
        }
        Ok(())
    };

    for (i, table) in tables.iter().enumerate() {
        let disc = Discount::new(rates[i % rates.len()]).map_err(|e| e.to_string())?;
        for x in 0..=table.omega() {
            for product in [Product::Annuity, Product::WholeLife] {
                let got = single_life_value(table, product, x, &disc, horizon)
                    .map_err(|e| e.to_string())?;
                let want = single_life_oracle(table, x, product, 0, &disc, horizon);
                check(format!("table {i} {product} at {x}"), got, want)?;
            }
            for n in [1, 2, table.omega()] {
                let got = term_insurance(table, x, n, &disc).map_err(|e| e.to_string())?;
                let want = single_life_oracle(table, x, Product::Term, n, &disc, horizon);
                check(format!("table {i} term({n}) at {x}"), got, want)?;
                let got = endowment(table, x, n, &disc).map_err(|e| e.to_string())?;
                let want = single_life_oracle(table, x, Product::Endowment, n, &disc, horizon);
                check(format!("table {i} endowment({n}) at {x}"), got, want)?;
            }
        }

        // Pair each table with its neighbor for the two-life products.
        let mother = &tables[(i + 1) % tables.len()];
        let copula = &copulas[i % copulas.len()];
        let x_f = rng.random_range(0..=table.omega());
        let x_m = rng.random_range(0..=mother.omega());
        let model =
            JointModel::new(table, mother, copula, x_f, x_m).map_err(|e| e.to_string())?;
        for product in [Product::Joint, Product::LastSurvivor, Product::Widow] {
            let got = model.value(product, &disc, horizon).map_err(|e| e.to_string())?;
            let want =
                joint_oracle(table, mother, copula, x_f, x_m, product, &disc, horizon)?;
            check(
                format!("pair {i} {product} at ({x_f}, {x_m}) under {}", copula.family()),
                got,
                want,
            )?;
        }
    }
    let took = budget(start, ORACLE_BUDGET)?;
    Ok(format!("{comparisons} product values within {ORACLE_TOL:.0e} (worst {worst:.2e}), {took}"))
}

// ===== 5: A + (1 - nu)(1 + a) = 1 on closed tables =====

fn criterion_5() -> Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(505);
    let gompertz = LawParams::Gompertz { a: 2.26e-4, b: 0.085 };
    let mut tables = vec![
        LifeTable::from_qx(vec![0.5, 1.0]).map_err(|e| e.to_string())?,
        LifeTable::from_qx(vec![0.02, 0.1, 0.35, 0.6, 0.8, 1.0]).map_err(|e| e.to_string())?,
        law_table(&gompertz),
    ];
    for _ in 0..5 {
        tables.push(random_small_table(&mut rng));
    }

    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for (i, table) in tables.iter().enumerate() {
        let horizon = table.omega() + 1; // covers the whole closed table
        for rate in [0.01, 0.03, 0.08] {
            let disc = Discount::new(rate).map_err(|e| e.to_string())?;
            for x in 0..=table.omega() {
                let a = life_annuity(table, x, &disc, horizon).map_err(|e| e.to_string())?;
                let big_a =
                    whole_life_insurance(table, x, &disc, horizon).map_err(|e| e.to_string())?;
                let gap = (big_a + (1.0 - disc.nu()) * (1.0 + a) - 1.0).abs();
                worst = worst.max(gap);
                checked += 1;
                if gap > IDENTITY_TOL {
                    return Err(format!(
                        "table {i}, x={x}, i={rate}: identity off by {gap:.2e} (> {IDENTITY_TOL:.0e})"
                    ));
                }
            }
        }
    }
    Ok(format!("{checked} (table, age, rate) combinations, worst gap {worst:.2e}"))
}

// ===== 6: dependence squeezes annuities between the independence and =====
// ===== comonotone bounds, strictly for interior theta               =====

/// Closed table generated by a law: q from the law at each age, q = 1 at
/// the terminal age.
fn law_table(law: &LawParams) -> LifeTable {
    let qx: Vec<f64> = (0..=MAX_AGE)
        .map(|x| if x == MAX_AGE { 1.0 } else { law.one_year_q(x) })
        .collect();
    LifeTable::from_qx(qx).expect("law probabilities form a valid table")
}

fn criterion_6() -> Result<String, String> {
    let start = Instant::now();
    let husband = law_table(&LawParams::Gompertz { a: 2.26e-4, b: 0.085 });
    let wife = law_table(&LawParams::Gompertz { a: 1.83e-4, b: 0.090 });
    let disc = Discount::new(0.03).map_err(|e| e.to_string())?;
    let horizon = 100;

    let mut details = String::new();
    for theta in [0.5, 1.0, 2.0, 3.367, 6.0] {
        let copula = Copula::parametric(CopulaFamily::Frank, theta).map_err(|e| e.to_string())?;
        let model = JointModel::new(&husband, &wife, &copula, 60, 58).map_err(|e| e.to_string())?;
        let a = model.annuities(&disc, horizon);
        let b = model.bounds(&disc, horizon);
        // (lower, value, upper) triples; the joint annuity grows with
        // dependence while last-survivor and widow annuities shrink.
        let chains = [
            ("a_joint", b.independent.a_joint, a.a_joint, b.comonotone.a_joint),
            ("a_last", b.comonotone.a_last, a.a_last, b.independent.a_last),
            ("a_widow", b.comonotone.a_widow, a.a_widow, b.independent.a_widow),
        ];
        for (name, lower, value, upper) in chains {
            if !(lower < value && value < upper) {
                return Err(format!(
                    "theta={theta}: {name} chain not strict: {lower:.6} < {value:.6} < {upper:.6}"
                ));
            }
        }
        let _ = write!(details, " {theta}:{:.3}", a.a_joint);
    }
    let took = budget(start, BOUNDS_BUDGET)?;
    Ok(format!("3 chains strict for all 5 thetas (a_joint{details}), {took}"))
}

// ===== 7: widow annuity under dependence is below independence, =====
// ===== with the ratio rising toward 1 in age                    =====

fn criterion_7() -> Result<String, String> {
    let husband = law_table(&LawParams::Gompertz { a: 2.26e-4, b: 0.085 });
    let wife = law_table(&LawParams::Gompertz { a: 1.83e-4, b: 0.090 });
    let copula = Copula::parametric(CopulaFamily::Frank, 3.367).map_err(|e| e.to_string())?;
    let disc = Discount::new(0.03).map_err(|e| e.to_string())?;
    let horizon = 100;

    // The synthetic couples carry Frank dependence on their full
    // lifetimes, so the couple observed at the contract ages is priced
    // with the from-birth conditioning; the at-contract ratio is exported
    // alongside for comparison.
    let mut curve = Vec::new();
    for wife_age in 30..=70u32 {
        let birth = JointModel::from_birth(&husband, &wife, &copula, wife_age + 2, wife_age)
            .map_err(|e| e.to_string())?;
        let renewed = JointModel::new(&husband, &wife, &copula, wife_age + 2, wife_age)
            .map_err(|e| e.to_string())?;
        let widow = birth.annuities(&disc, horizon).a_widow;
        let independent = birth.bounds(&disc, horizon).independent.a_widow;
        let widow_renewed = renewed.annuities(&disc, horizon).a_widow;
        curve.push((
            wife_age,
            widow,
            independent,
            widow / independent,
            widow_renewed / independent,
        ));
    }

    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("widow_ratio_curve.csv");
    let mut csv = String::from(
        "wife_age,a_widow,a_widow_independent,ratio,ratio_at_contract_timing\n",
    );
    for &(age, widow, indep, ratio, renewed) in &curve {
        let _ = writeln!(csv, "{age},{widow},{indep},{ratio},{renewed}");
    }
    std::fs::write(&out, csv).map_err(|e| format!("writing {}: {e}", out.display()))?;

    for &(age, _, _, ratio, _) in &curve {
        if ratio >= 1.0 {
            return Err(format!("ratio at wife age {age} is {ratio:.4}, not below 1"));
        }
    }
    for pair in curve.windows(2) {
        let (age0, r0) = (pair[0].0, pair[0].3);
        let (age1, r1) = (pair[1].0, pair[1].3);
        if r1 < r0 - WIDOW_TREND_SLACK {
            let dip = curve
                .iter()
                .cloned()
                .fold((0u32, f64::INFINITY), |acc, p| {
                    if p.3 < acc.1 { (p.0, p.3) } else { acc }
                });
            return Err(format!(
                "ratio not monotone toward 1: {r0:.6} at {age0} -> {r1:.6} at {age1}; \
                 curve is U-shaped with minimum {:.4} at wife age {} \
                 (endpoints {:.4} at 30 -> {:.4} at 70), curve in {}",
                dip.1,
                dip.0,
                curve.first().unwrap().3,
                curve.last().unwrap().3,
                out.display()
            ));
        }
    }
    let (first, last) = (curve.first().unwrap(), curve.last().unwrap());
    Ok(format!(
        "ratio {:.4} at {} rising to {:.4} at {}, curve in {}",
        first.3,
        first.0,
        last.3,
        last.0,
        out.display()
    ))
}

// ===== 8: parents' vital status moves a child's annuity up and its =====
// ===== life insurance down                                         =====

fn criterion_8() -> Result<String, String> {
    let config = GenConfig {
        n_founders: 60_000,
        generations: 2,
        seed: 808,
        ..GenConfig::default()
    };
    let records = generate(&config).map_err(|e| e.to_string())?;
    let (rows, _) = build_child_parents(&records);
    let disc = Discount::new(0.03).map_err(|e| e.to_string())?;
    let horizon = 100;

    let mut qualifying = 0usize;
    for age in 20..=60u32 {
        let baseline = conditional_table_parents(&rows, age, Condition::Baseline);
        let alive =
            conditional_table_parents(&rows, age, Condition::Parents(ParentStatus::BothAlive));
        let dead =
            conditional_table_parents(&rows, age, Condition::Parents(ParentStatus::BothDead));
        let (Ok(baseline), Ok(alive), Ok(dead)) = (baseline, alive, dead) else {
            continue;
        };
        if baseline.n() < MIN_RISK_SET || alive.n() < MIN_RISK_SET || dead.n() < MIN_RISK_SET {
            continue;
        }
        qualifying += 1;

        let price = |table: &jointlife::lifetable::ConditionalTable,
                     product: Product|
         -> Result<f64, String> {
            single_life_value(table.table(), product, 0, &disc, horizon).map_err(|e| e.to_string())
        };
        let (a_alive, a_base, a_dead) = (
            price(&alive, Product::Annuity)?,
            price(&baseline, Product::Annuity)?,
            price(&dead, Product::Annuity)?,
        );
        if !(a_alive > a_base && a_base > a_dead) {
            return Err(format!(
                "annuity ordering fails at age {age}: both-alive {a_alive:.4}, \
                 baseline {a_base:.4}, both-dead {a_dead:.4}"
            ));
        }
        let (w_alive, w_base, w_dead) = (
            price(&alive, Product::WholeLife)?,
            price(&baseline, Product::WholeLife)?,
            price(&dead, Product::WholeLife)?,
        );
        if !(w_alive < w_base && w_base < w_dead) {
            return Err(format!(
                "whole-life ordering fails at age {age}: both-alive {w_alive:.4}, \
                 baseline {w_base:.4}, both-dead {w_dead:.4}"
            ));
        }
    }
    if qualifying < MIN_QUALIFYING_AGES {
        return Err(format!(
            "only {qualifying} ages had all three risk sets >= {MIN_RISK_SET}; \
             need {MIN_QUALIFYING_AGES} for a meaningful check"
        ));
    }
    Ok(format!(
        "both orderings hold at all {qualifying} ages with risk sets >= {MIN_RISK_SET} \
         ({} child rows)",
        rows.len()
    ))
}

// ===== 9: each law round-trips through simulation and refit =====

struct Recovery {
    name: &'static str,
    truth: f64,
    fitted: f64,
    tol: f64,
}

fn recoveries(truth: &LawParams, fitted: &LawParams) -> Vec<Recovery> {
    let r = |name, t, f, tol| Recovery { name, truth: t, fitted: f, tol };
    match (truth, fitted) {
        (&LawParams::Gompertz { a, b }, &LawParams::Gompertz { a: fa, b: fb }) => {
            vec![r("a", a, fa, RECOVERY_TOL), r("b", b, fb, RECOVERY_TOL)]
        }
        (&LawParams::Beard { a, b, k }, &LawParams::Beard { a: fa, b: fb, k: fk }) => vec![
            r("a", a, fa, RECOVERY_TOL),
            r("b", b, fb, RECOVERY_TOL),
            r("k", k, fk, RECOVERY_TOL),
        ],
        (
            &LawParams::Carriere {
                psi_child,
                psi_hump,
                psi_old,
                weibull_scale,
                weibull_shape,
                hump_mu,
                hump_sigma,
                gompertz_a,
                gompertz_b,
            },
            &LawParams::Carriere {
                psi_child: f_psi_child,
                psi_hump: f_psi_hump,
                psi_old: f_psi_old,
                weibull_scale: f_weibull_scale,
                weibull_shape: f_weibull_shape,
                hump_mu: f_hump_mu,
                hump_sigma: f_hump_sigma,
                gompertz_a: f_gompertz_a,
                gompertz_b: f_gompertz_b,
            },
        ) => vec![
            r("psi_child", psi_child, f_psi_child, RECOVERY_TOL),
            r("psi_hump", psi_hump, f_psi_hump, RECOVERY_TOL),
            r("psi_old", psi_old, f_psi_old, RECOVERY_TOL),
            r("weibull_scale", weibull_scale, f_weibull_scale, RECOVERY_TOL),
            r("weibull_shape", weibull_shape, f_weibull_shape, RECOVERY_TOL),
            r("hump_mu", hump_mu, f_hump_mu, RECOVERY_TOL),
            r("hump_sigma", hump_sigma, f_hump_sigma, RECOVERY_TOL),
            r("gompertz_a", gompertz_a, f_gompertz_a, RECOVERY_TOL),
            r("gompertz_b", gompertz_b, f_gompertz_b, RECOVERY_TOL),
        ],
        (
            &LawParams::HeligmanPollard { a, b, c, d, e, f, g, h },
            &LawParams::HeligmanPollard {
                a: fa,
                b: fb,
                c: fc,
                d: fd,
                e: fe,
                f: ff,
                g: fg,
                h: fh,
            },
        ) => vec![
            r("a", a, fa, RECOVERY_TOL),
            r("b", b, fb, RECOVERY_TOL),
            r("c", c, fc, RECOVERY_TOL),
            r("d", d, fd, RECOVERY_TOL_HP_HUMP),
            r("e", e, fe, RECOVERY_TOL_HP_HUMP),
            r("f", f, ff, RECOVERY_TOL_HP_HUMP),
            r("g", g, fg, RECOVERY_TOL),
            r("h", h, fh, RECOVERY_TOL),
        ],
        _ => unreachable!("fit returns the same family it was asked for"),
    }
}

fn criterion_9() -> Result<String, String> {
    let start = Instant::now();
    let truths = [
        LawParams::Gompertz { a: 2.6e-4, b: 0.083 },
        // The logistic bend sits near age 53 (where k·a·e^{bx} = 1) with a
        // plateau at 1/k = 0.2, low enough that survivors keep accumulating
        // exposure through the flattening arc — that is what identifies k.
        LawParams::Beard { a: 1.0e-3, b: 0.13, k: 5.0 },
        LawParams::Carriere {
            psi_child: 0.05,
            psi_hump: 0.10,
            psi_old: 0.85,
            weibull_scale: 1.5,
            weibull_shape: 0.45,
            hump_mu: 3.2188758248682006, // ln 25: hump centered at 25 years
            hump_sigma: 0.18,
            // A modal age at death near 55 spreads old-age deaths over a wide
            // age band, which breaks the usual (a, b) ridge in the Gompertz
            // tail and lets both parameters resolve to within tolerance.
            gompertz_a: 1.0e-3,
            gompertz_b: 0.08,
        },
        // Child mortality decaying over roughly ages 0-8 (A large, C = 0.5)
        // gives B and C distinguishable signatures across several ages with
        // thousands of deaths each; a dominant, moderately wide accident hump
        // keeps D, E, F inside their looser band.
        LawParams::HeligmanPollard {
            a: 0.05,
            b: 1.0,
            c: 0.5,
            d: 2.5e-3,
            e: 5.0,
            f: 20.0,
            g: 1.0e-4,
            h: 1.10,
        },
    ];
    let opts = FitOptions { starts: 12, max_evals: 20_000, seed: 1 };
    let mut summary = Vec::new();
    for (i, truth) in truths.iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(900 + i as u64);
        let lifetimes =
            simulate_lifetimes(truth, 100_000, MAX_AGE as f64, &mut rng).map_err(|e| e.to_string())?;
        let observations = empirical_rates(&lifetimes, MAX_AGE).map_err(|e| e.to_string())?;
        let report = fit(truth.kind(), &observations, ObservedRate::DeathProb, &opts)
            .map_err(|e| e.to_string())?;
        if !report.converged {
            return Err(format!("{:?} fit did not converge", truth.kind()));
        }
        let mut worst = 0.0f64;
        for rec in recoveries(truth, &report.params) {
            let rel = (rec.fitted - rec.truth).abs() / rec.truth.abs();
            worst = worst.max(rel);
            if rel > rec.tol {
                return Err(format!(
                    "{:?} parameter {} off by {:.1}% (truth {}, fitted {:.6}, tol {:.0}%)",
                    truth.kind(),
                    rec.name,
                    100.0 * rel,
                    rec.truth,
                    rec.fitted,
                    100.0 * rec.tol
                ));
            }
        }
        summary.push(format!("{:?} {:.1}%", truth.kind(), 100.0 * worst));
    }
    let took = budget(start, RECOVERY_BUDGET)?;
    Ok(format!("worst relative errors: {}, {took}", summary.join(", ")))
}

// ===== 10: the full pipeline is byte-identical across reruns =====

fn run_pipeline(dir: &Path) -> Result<(), String> {
    let run = |args: &[&str]| -> Result<(), String> {
        let mut argv = vec!["jointlife"];
        argv.extend_from_slice(args);
        let code = jointlife::cli::run_args(argv.iter().map(|s| s.to_string()));
        if code == 0 {
            Ok(())
        } else {
            Err(format!("`{}` exited with {code}", args.join(" ")))
        }
    };
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();

    run(&["simulate", "--seed", "99", "--out", &p("persons.csv")])?;
    run(&["ingest", "--input", &p("persons.csv"), "--out-dir", &p("tables")])?;
    run(&[
        "fit-law", "--law", "gompertz",
        "--input", &p("tables/couples.csv"),
        "--out-dir", &p("fit"),
        "--seed", "99",
    ])?;
    run(&[
        "dependence", "--pairs", "couples", "--stat", "spearman",
        "--input", &p("tables/couples.csv"),
        "--out-dir", &p("dep"),
        "--seed", "99",
    ])?;
    run(&[
        "dependence", "--pairs", "couples", "--stat", "copula-fit", "--family", "frank",
        "--input", &p("tables/couples.csv"),
        "--out-dir", &p("dep"),
        "--seed", "99",
    ])?;
    run(&[
        "dependence", "--pairs", "child_parents", "--stat", "pqd", "--bootstraps", "200",
        "--input", &p("tables/child_parents.csv"),
        "--out-dir", &p("dep"),
        "--seed", "99",
    ])?;
    run(&[
        "price", "--product", "joint",
        "--input", &p("tables/couples.csv"),
        "--age", "65", "--partner-age", "62",
        "--family", "frank", "--theta", "3.367",
        "--out", &p("price_joint.csv"),
    ])?;
    run(&[
        "price", "--product", "annuity",
        "--input", &p("tables/child_parents.csv"),
        "--age", "30", "--condition", "both-alive",
        "--out", &p("price_child.csv"),
    ])?;
    run(&["report", "--run-dir", &p(""), "--out", &p("report.json")])?;
    Ok(())
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) -> Result<(), String> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| format!("reading {}: {e}", dir.display()))?
        .collect::<std::io::Result<_>>()
        .map_err(|e| e.to_string())?;
    entries.sort_by_key(|e| e.path());
    for entry in entries {
        let path = entry.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path
                .strip_prefix(root)
                .map_err(|e| e.to_string())?
                .to_string_lossy()
                .into_owned();
            let bytes = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            out.push((rel, bytes));
        }
    }
    Ok(())
}

fn criterion_10() -> Result<String, String> {
    let start = Instant::now();
    let base = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let mut snapshots = Vec::new();
    for name in ["pipeline_run_a", "pipeline_run_b"] {
        let dir = base.join(name);
        if dir.exists() {
            std::fs::remove_dir_all(&dir).map_err(|e| e.to_string())?;
        }
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        run_pipeline(&dir)?;
        let mut files = Vec::new();
        collect_files(&dir, &dir, &mut files)?;
        snapshots.push(files);
    }

    let (a, b) = (&snapshots[0], &snapshots[1]);
    if a.len() != b.len() {
        let names = |s: &[(String, Vec<u8>)]| s.iter().map(|f| f.0.clone()).collect::<Vec<_>>();
        return Err(format!(
            "runs produced different file sets: {:?} vs {:?}",
            names(a),
            names(b)
        ));
    }
    let mut bytes = 0usize;
    for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(b) {
        if name_a != name_b {
            return Err(format!("file sets diverge: {name_a} vs {name_b}"));
        }
        if bytes_a != bytes_b {
            return Err(format!("{name_a} differs between runs"));
        }
        bytes += bytes_a.len();
    }
    let took = budget(start, PIPELINE_BUDGET)?;
    Ok(format!(
        "two 9-command runs byte-identical across {} files ({} KiB), {took}",
        a.len(),
        bytes / 1024
    ))
}
