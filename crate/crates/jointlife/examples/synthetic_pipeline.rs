//! Generate a synthetic genealogy, round-trip it through the persons CSV,
//! and build the three analysis tables (couples, child–parents,
//! child–grandparents) exactly as the `ingest` subcommand does.

use jointlife::family::{
    build_child_grandparents, build_child_parents, build_couples, read_persons_csv, sanitize,
    write_persons_csv,
};
use jointlife::synthgen::{generate, GenConfig};

fn main() -> jointlife::Result<()> {
    let config = GenConfig {
        n_founders: 1200,
        generations: 3,
        seed: 42,
        ..GenConfig::default()
    };
    let records = generate(&config)?;
    println!("generated {} person records across {} generations", records.len(), config.generations);

    // Round-trip through the on-disk format so the example exercises the
    // same path as `jointlife simulate | jointlife ingest`.
    let dir = std::env::temp_dir().join("jointlife_synthetic_pipeline");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let persons_path = dir.join("persons.csv");
    write_persons_csv(&persons_path, &records)?;
    let mut records = read_persons_csv(&persons_path)?;

    let sanitized = sanitize(&mut records);
    println!(
        "sanitize: {} death-before-birth, {} implausibly old",
        sanitized.death_before_birth, sanitized.age_above_maximum
    );

    let (couples, cc) = build_couples(&records);
    println!(
        "couples:            {:5} kept of {:5} candidates ({} incomplete dates, {} age-filtered)",
        cc.kept, cc.candidates, cc.incomplete_dates, cc.age_filter
    );

    let (child_parents, cp) = build_child_parents(&records);
    println!(
        "child-parents:      {:5} kept of {:5} candidates ({} incomplete dates, {} age-filtered)",
        cp.kept, cp.candidates, cp.incomplete_dates, cp.age_filter
    );

    let (_child_grandparents, cg) = build_child_grandparents(&records);
    println!(
        "child-grandparents: {:5} kept of {:5} candidates ({} without any qualifying grandparent)",
        cg.kept, cg.candidates, cg.no_qualifying_grandparent
    );

    // A taste of what the tables feed: mean lifetimes per role.
    let mean = |it: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = it.collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    println!(
        "mean lifetimes: fathers {:.1}, mothers {:.1}, children {:.1}",
        mean(&mut couples.iter().map(|r| r.t_f)),
        mean(&mut couples.iter().map(|r| r.t_m)),
        mean(&mut child_parents.iter().map(|r| r.t_c)),
    );
    Ok(())
}
