//! Price single-life products off a cohort life table, check the classical
//! annuity/insurance identity, and quantify how much a child's parents'
//! survival status moves an annuity price.

use jointlife::family::{build_child_parents, conditional_table_parents, Condition, ParentStatus};
use jointlife::laws::{simulate_lifetimes, LawParams};
use jointlife::lifetable::{LifeTable, MAX_AGE};
use jointlife::pricing::{
    conditional_value, endowment, life_annuity, single_life_value, term_insurance,
    whole_life_insurance, Discount, Product,
};
use jointlife::synthgen::{generate, GenConfig};
use rand::SeedableRng;

fn main() -> jointlife::Result<()> {
    let law = LawParams::Gompertz { a: 2.26e-4, b: 0.085 };
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
    let lifetimes = simulate_lifetimes(&law, 80_000, MAX_AGE as f64, &mut rng)?;
    let table = LifeTable::from_ages_at_death(&lifetimes, MAX_AGE)?;
    let disc = Discount::new(0.03)?;
    let horizon = 100;

    println!("{:>4} {:>9} {:>9} {:>10} {:>11}", "age", "annuity", "whole", "term(20)", "endow(20)");
    for age in [30u32, 45, 65] {
        println!(
            "{age:>4} {:>9.4} {:>9.4} {:>10.4} {:>11.4}",
            life_annuity(&table, age, &disc, horizon)?,
            whole_life_insurance(&table, age, &disc, horizon)?,
            term_insurance(&table, age, 20, &disc)?,
            endowment(&table, age, 20, &disc)?,
        );
    }

    // A_x + (1 - nu)(1 + a_x) = 1 whenever the horizon covers the table.
    let a = life_annuity(&table, 40, &disc, horizon)?;
    let big_a = whole_life_insurance(&table, 40, &disc, horizon)?;
    let identity = big_a + (1.0 - disc.nu()) * (1.0 + a);
    println!("\nidentity at 40: A + (1-nu)(1+a) = {identity:.12} (should be 1)");

    // Same annuity from the generic product dispatcher.
    let via_product = single_life_value(&table, Product::Annuity, 40, &disc, horizon)?;
    println!("a_40 = {a:.6} (direct) = {via_product:.6} (via Product::Annuity)");

    // Conditional pricing: how much does parents' vital status at 30 change
    // a child's annuity?
    let records = generate(&GenConfig { n_founders: 4000, generations: 3, seed: 11, ..GenConfig::default() })?;
    let (rows, _) = build_child_parents(&records);
    let baseline = conditional_table_parents(&rows, 30, Condition::Baseline)?;
    println!("\nannuity at 30 for a child, by parents' status (baseline n = {}):", baseline.n());
    for (label, condition) in [
        ("both alive", Condition::Parents(ParentStatus::BothAlive)),
        ("one alive", Condition::ParentsOneAlive),
        ("both dead", Condition::Parents(ParentStatus::BothDead)),
    ] {
        let cond = conditional_table_parents(&rows, 30, condition)?;
        let priced = conditional_value(&cond, &baseline, Product::Annuity, &disc, horizon)?;
        println!(
            "  {:12} n={:5}  a = {:7.4}  ({:+.2}% vs baseline {:.4})",
            label,
            cond.n(),
            priced.value,
            priced.rel_diff_pct,
            priced.baseline
        );
    }
    Ok(())
}
