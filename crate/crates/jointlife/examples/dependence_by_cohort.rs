//! Spearman rank correlation between spouses' lifetimes, overall and sliced
//! by the husband's birth decade, with bootstrap confidence intervals.

use jointlife::dependence::{spearman_by_cohort, spearman_ci};
use jointlife::family::build_couples;
use jointlife::synthgen::{generate, GenConfig};

fn main() -> jointlife::Result<()> {
    let config = GenConfig { n_founders: 3000, generations: 3, seed: 4, ..GenConfig::default() };
    let records = generate(&config)?;
    let (couples, _) = build_couples(&records);

    let t_f: Vec<f64> = couples.iter().map(|r| r.t_f).collect();
    let t_m: Vec<f64> = couples.iter().map(|r| r.t_m).collect();
    let overall = spearman_ci(&t_f, &t_m, 400, 12345)?;
    println!(
        "overall: rho = {:.4}  (95% CI [{:.4}, {:.4}], n = {})\n",
        overall.rho, overall.ci_low, overall.ci_high, overall.n
    );

    let rows: Vec<(i32, f64, f64)> =
        couples.iter().map(|r| (r.cohort_year(), r.t_f, r.t_m)).collect();
    let scan = spearman_by_cohort(&rows, 400, 12345)?;
    println!("{:>7} {:>8} {:>9} {:>9} {:>6}", "decade", "rho", "ci_low", "ci_high", "n");
    for cohort in &scan.cohorts {
        let r = &cohort.result;
        println!(
            "{:>7} {:>8.4} {:>9.4} {:>9.4} {:>6}",
            cohort.cohort, r.rho, r.ci_low, r.ci_high, r.n
        );
    }
    for skipped in &scan.skipped {
        println!("{:>7} skipped: {}", skipped.cohort, skipped.reason);
    }
    Ok(())
}
