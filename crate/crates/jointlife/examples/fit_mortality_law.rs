//! Fit all four parametric mortality laws to the same simulated cohort and
//! compare the fitted hazards against the generating truth.

use jointlife::laws::{
    empirical_rates, fit, simulate_lifetimes, FitOptions, LawKind, LawParams, ObservedRate,
};
use jointlife::lifetable::MAX_AGE;
use rand::SeedableRng;

fn main() -> jointlife::Result<()> {
    let truth = LawParams::Gompertz { a: 2.6e-4, b: 0.083 };
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
    let lifetimes = simulate_lifetimes(&truth, 100_000, MAX_AGE as f64, &mut rng)?;
    let observations = empirical_rates(&lifetimes, MAX_AGE)?;
    println!(
        "simulated {} lifetimes -> {} usable age points\n",
        lifetimes.len(),
        observations.len()
    );

    let opts = FitOptions { starts: 8, max_evals: 5000, seed: 0 };
    println!("{:10} {:>12} {:>7} {:>10}  params", "law", "loss", "evals", "converged");
    for kind in [LawKind::Gompertz, LawKind::Beard, LawKind::Carriere, LawKind::HeligmanPollard] {
        let report = fit(kind, &observations, ObservedRate::DeathProb, &opts)?;
        println!(
            "{:10} {:>12.4e} {:>7} {:>10}  {:?}",
            format!("{kind:?}"),
            report.loss,
            report.evals,
            report.converged,
            report.params
        );
    }

    // How close did the Gompertz refit land? Compare hazards at a few ages.
    let refit = fit(LawKind::Gompertz, &observations, ObservedRate::DeathProb, &opts)?;
    println!("\n{:>4} {:>12} {:>12} {:>9}", "age", "true mu", "fitted mu", "rel err");
    for age in [30u32, 50, 70, 90] {
        let t = truth.year_hazard(age);
        let f = refit.params.year_hazard(age);
        println!("{age:>4} {t:>12.6} {f:>12.6} {:>8.2}%", 100.0 * (f - t) / t);
    }
    Ok(())
}
