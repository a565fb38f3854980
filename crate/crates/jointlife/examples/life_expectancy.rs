//! Build cohort life tables from observed ages at death and read off
//! survival probabilities and curtate life expectancies, then condition a
//! children's table on whether the parents were alive at a given age.

use jointlife::family::{build_child_parents, conditional_table_parents, Condition, ParentStatus};
use jointlife::laws::{simulate_lifetimes, LawParams};
use jointlife::lifetable::{LifeTable, MAX_AGE};
use jointlife::synthgen::{generate, GenConfig};
use rand::SeedableRng;

fn main() -> jointlife::Result<()> {
    // Two Gompertz populations: a male-like and a female-like schedule.
    let male = LawParams::Gompertz { a: 2.26e-4, b: 0.085 };
    let female = LawParams::Gompertz { a: 1.83e-4, b: 0.090 };
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);

    println!("{:8} {:>8} {:>8} {:>8} {:>8}", "table", "e0", "e40", "e65", "40p25");
    for (name, law) in [("male", &male), ("female", &female)] {
        let lifetimes = simulate_lifetimes(law, 50_000, MAX_AGE as f64, &mut rng)?;
        let table = LifeTable::from_ages_at_death(&lifetimes, MAX_AGE)?;
        println!(
            "{:8} {:>8.2} {:>8.2} {:>8.2} {:>8.4}",
            name,
            table.curtate_ex(0)?,
            table.curtate_ex(40)?,
            table.curtate_ex(65)?,
            table.tpx(25, 40)?,
        );
    }

    // Conditional tables: children who still had both parents at age 30
    // versus children who had already lost both.
    let config = GenConfig { n_founders: 4000, generations: 3, seed: 11, ..GenConfig::default() };
    let records = generate(&config)?;
    let (rows, _) = build_child_parents(&records);
    println!("\nchildren at age 30, by parents' status ({} child rows):", rows.len());
    for (label, condition) in [
        ("baseline (all)", Condition::Baseline),
        ("both parents alive", Condition::Parents(ParentStatus::BothAlive)),
        ("both parents dead", Condition::Parents(ParentStatus::BothDead)),
    ] {
        match conditional_table_parents(&rows, 30, condition) {
            Ok(cond) => println!(
                "  {:20} risk set {:5}, remaining e30 = {:.2}",
                label,
                cond.n(),
                cond.expectation()
            ),
            Err(e) => println!("  {label:20} unavailable: {e}"),
        }
    }
    Ok(())
}
