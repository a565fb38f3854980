//! Joint-life mortality analysis for family data.
//!
//! This crate estimates life tables from genealogical records, fits
//! parametric mortality laws, measures the dependence between the lifetimes
//! of family members with copulas and rank statistics, and prices single-
//! and multi-life insurance products under a dependent joint model.
//!
//! The best starting point is the `examples/` directory; each example is a
//! runnable walkthrough of one capability:
//!
//! ```text
//! cargo run --example synthetic_pipeline   # generate a corpus and ingest it
//! cargo run --example life_expectancy      # life tables and conditional tables
//! cargo run --example fit_mortality_law    # parametric law fitting
//! cargo run --example copula_fit           # pseudo-observations and copula MLE
//! cargo run --example pqd_test             # positive-quadrant-dependence test
//! cargo run --example price_products       # single-life and conditional pricing
//! cargo run --example joint_annuities      # joint, last-survivor, widow pensions
//! cargo run --example dependence_by_cohort # Spearman rho by birth decade
//! ```
//!
//! The same operations are exposed as a thin command-line tool (`jointlife`)
//! with subcommands `simulate`, `ingest`, `fit-law`, `dependence`, `price`,
//! and `report`; see the crate README.

pub mod cli;
pub mod copulas;
pub mod dates;
pub mod dependence;
pub mod error;
pub mod family;
pub mod laws;
pub mod lifetable;
pub mod normal;
pub mod pricing;
pub mod synthgen;

pub use error::{Error, Result};

/// Derive a named sub-seed from a master seed, so that one `--seed` flag
/// deterministically fans out into independent random streams.
pub fn subseed(master: u64, name: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(name.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}
