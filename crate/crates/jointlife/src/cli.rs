//! Batch command-line front end: simulate → ingest → fit-law → dependence →
//! price → report, with per-run manifests for reproducibility.
//!
//! Exit codes: 0 success, 2 input/usage error, 3 numerical non-convergence,
//! 4 empty risk set.

use crate::copulas::{self, Copula, CopulaFamily, pseudo_observations};
use crate::dependence::{SkippedCohort, SpearmanResult, spearman_by_cohort, spearman_ci};
use crate::error::{Error, Result};
use crate::family::{
    self, Condition, build_child_grandparents, build_child_parents, build_couples,
    conditional_table_grandparents, conditional_table_parents, grandparent_baseline_table,
    read_child_grandparents_csv, read_child_parents_csv, read_couples_csv, read_persons_csv,
    sanitize,
};
use crate::laws::{FitOptions, LawKind, Observation, ObservedRate};
use crate::lifetable::{LifeTable, MAX_AGE};
use crate::pricing::{
    self, Discount, JointModel, Product, conditional_value, single_life_value,
};
use crate::subseed;
use crate::synthgen::{GenConfig, generate};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::BufRead;
use std::path::{Path, PathBuf};

/// Joint-lives mortality, dependence and pricing toolkit.
#[derive(Debug, Parser)]
#[command(name = "jointlife", version, about)]
pub struct Cli {
    /// Cap on worker threads (the JOINTLIFE_THREADS env var is honored too).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic person corpus from a JSON config.
    Simulate {
        /// Generation config JSON; omitted fields take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output persons CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse a person CSV, sanitize it, and materialize the couples,
    /// child-parents and child-grandparents tables.
    Ingest {
        /// Person CSV (id,sex,birth,death,father_id,mother_id).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Fit a mortality law to a life-table CSV.
    FitLaw {
        /// gompertz | beard | carriere | hp
        #[arg(long)]
        law: String,
        /// Life table CSV (age,qx,lx,ex) or a pair table written by `ingest`.
        #[arg(long)]
        input: PathBuf,
        /// Lifetime column to tabulate when the input is a pair table:
        /// father | mother | child.
        #[arg(long)]
        margin: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Optimizer starts (1 informed + the rest random).
        #[arg(long, default_value_t = 8)]
        starts: usize,
        /// Objective evaluation budget per start.
        #[arg(long, default_value_t = 5000)]
        max_evals: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dependence statistics on an ingested pair table.
    Dependence {
        /// couples | child_parents | child_grandparents
        #[arg(long)]
        pairs: String,
        /// spearman | pqd | copula-fit
        #[arg(long)]
        stat: String,
        /// Pair table CSV written by `ingest`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Copula family for `--stat copula-fit`.
        #[arg(long, default_value = "frank")]
        family: String,
        /// Grid resolution for the PQD statistic.
        #[arg(long, default_value_t = 50)]
        grid: usize,
        /// Bootstrap replicates for the PQD p-value.
        #[arg(long, default_value_t = 500)]
        bootstraps: usize,
        /// Bootstrap resamples for Spearman confidence intervals.
        #[arg(long, default_value_t = 400)]
        resamples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Price one product; writes a pricing CSV row
    /// (age,condition,product,value,rel_diff_pct).
    Price {
        /// annuity | whole | term | endowment | joint | last | widow
        #[arg(long)]
        product: String,
        /// Life table CSV or a pair table from `ingest` (detected from the
        /// header). Joint products need the couples table.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        age: u32,
        /// Partner's age for joint products (defaults to --age).
        #[arg(long)]
        partner_age: Option<u32>,
        /// Conditioning event: baseline, both_alive, only_father,
        /// only_mother, both_dead, one_alive, or grandparents_alive_K.
        #[arg(long, default_value = "baseline")]
        condition: String,
        /// Annual effective interest rate.
        #[arg(long, default_value_t = pricing::DEFAULT_RATE)]
        rate: f64,
        /// Terms in the present-value sums (contract length for term and
        /// endowment products).
        #[arg(long, default_value_t = pricing::DEFAULT_HORIZON)]
        horizon: u32,
        /// Copula family for joint products.
        #[arg(long, default_value = "frank")]
        family: String,
        /// Copula parameter for joint products; fitted from the couples
        /// table when omitted.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Consolidate every run manifest under a directory into one report.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A file referenced by a run, addressed by name with its content hash.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
}

/// Reproducibility record written next to every command's outputs. Paths
/// are file names relative to the manifest's directory, so reruns in
/// different directories stay byte-identical.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Resolved settings, flag name → value.
    pub settings: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Input files hashed before any processing.
    pub inputs: Vec<FileDigest>,
    /// Output file names, in write order.
    pub outputs: Vec<String>,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        RunManifest {
            tool: "jointlife".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            settings: BTreeMap::new(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.settings.insert(key.into(), value.to_string());
    }

    fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileDigest {
            file: file_name(path),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    fn add_output(&mut self, path: &Path) {
        self.outputs.push(file_name(path));
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn guard_overwrite(paths: &[&Path], force: bool) -> Result<()> {
    if force {
        return Ok(());
    }
    for p in paths {
        if p.exists() {
            return Err(Error::InvalidInput(format!(
                "{} already exists; pass --force to overwrite",
                p.display()
            )));
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("JOINTLIFE_THREADS") {
            Ok(s) => Some(s.trim().parse::<usize>().map_err(|_| {
                Error::InvalidInput(format!(
                    "JOINTLIFE_THREADS must be a positive integer, got {s:?}"
                ))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::InvalidInput("thread count must be ≥ 1".into()));
        }
        // The global pool can only be initialized once per process; a
        // repeat configuration attempt is not an error worth failing on.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

/// Entry point for the binary: parse `std::env` arguments and run.
pub fn run() -> i32 {
    run_args(std::env::args_os())
}

/// Run with explicit arguments (first element is the program name) and
/// return the process exit code.
pub fn run_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    let force = cli.force;
    match cli.command {
        Command::Simulate { config, seed, out } => cmd_simulate(config.as_deref(), seed, &out, force),
        Command::Ingest { input, out_dir } => cmd_ingest(&input, &out_dir, force),
        Command::FitLaw {
            law,
            input,
            margin,
            out_dir,
            starts,
            max_evals,
            seed,
        } => cmd_fit_law(
            &law,
            &input,
            margin.as_deref(),
            &out_dir,
            starts,
            max_evals,
            seed,
            force,
        ),
        Command::Dependence {
            pairs,
            stat,
            input,
            out_dir,
            family,
            grid,
            bootstraps,
            resamples,
            seed,
        } => cmd_dependence(
            &pairs, &stat, &input, &out_dir, &family, grid, bootstraps, resamples, seed, force,
        ),
        Command::Price {
            product,
            input,
            age,
            partner_age,
            condition,
            rate,
            horizon,
            family,
            theta,
            out,
        } => cmd_price(
            &product,
            &input,
            age,
            partner_age,
            &condition,
            rate,
            horizon,
            &family,
            theta,
            &out,
            force,
        ),
        Command::Report { run_dir, out } => cmd_report(&run_dir, &out, force),
    }
}

fn manifest_sibling(primary_out: &Path, command: &str) -> PathBuf {
    let dir = primary_out.parent().unwrap_or_else(|| Path::new("."));
    dir.join(format!("{command}_manifest.json"))
}

// ===== simulate =====

fn cmd_simulate(
    config_path: Option<&Path>,
    seed_override: Option<u64>,
    out: &Path,
    force: bool,
) -> Result<()> {
    let mut manifest = RunManifest::new("simulate");
    let mut config: GenConfig = match config_path {
        Some(p) => {
            manifest.add_input(p)?;
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text)?
        }
        None => GenConfig::default(),
    };
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    config.validate()?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let manifest_path = manifest_sibling(out, "simulate");
    guard_overwrite(&[out, manifest_path.as_path()], force)?;

    let records = generate(&config)?;
    family::write_persons_csv(out, &records)?;
    manifest.seed = Some(config.seed);
    manifest.set("config", serde_json::to_string(&config)?);
    manifest.add_output(out);
    write_json(&manifest_path, &manifest)?;
    println!("wrote {} ({} records)", out.display(), records.len());
    Ok(())
}

// ===== ingest =====

fn cmd_ingest(input: &Path, out_dir: &Path, force: bool) -> Result<()> {
    let mut manifest = RunManifest::new("ingest");
    manifest.add_input(input)?;
    create_dir(out_dir)?;
    let couples_path = out_dir.join("couples.csv");
    let cp_path = out_dir.join("child_parents.csv");
    let cg_path = out_dir.join("child_grandparents.csv");
    let summary_path = out_dir.join("ingest_summary.json");
    let manifest_path = out_dir.join("ingest_manifest.json");
    guard_overwrite(
        &[
            couples_path.as_path(),
            cp_path.as_path(),
            cg_path.as_path(),
            summary_path.as_path(),
            manifest_path.as_path(),
        ],
        force,
    )?;

    let mut records = read_persons_csv(input)?;
    let sanitized = sanitize(&mut records);
    let (couples, couple_counts) = build_couples(&records);
    let (child_parents, cp_counts) = build_child_parents(&records);
    let (child_grandparents, cg_counts) = build_child_grandparents(&records);

    family::write_couples_csv(&couples_path, &couples)?;
    family::write_child_parents_csv(&cp_path, &child_parents)?;
    family::write_child_grandparents_csv(&cg_path, &child_grandparents)?;
    let summary = family::IngestSummary {
        persons: records.len(),
        sanitized,
        couples: couple_counts,
        child_parents: cp_counts,
        child_grandparents: cg_counts,
    };
    write_json(&summary_path, &summary)?;

    for p in [&couples_path, &cp_path, &cg_path, &summary_path] {
        manifest.add_output(p);
    }
    write_json(&manifest_path, &manifest)?;
    println!(
        "ingested {} persons: {} couples, {} child-parents, {} child-grandparents",
        records.len(),
        couples.len(),
        child_parents.len(),
        child_grandparents.len()
    );
    Ok(())
}

// ===== fit-law =====

/// Resolve the fit-law input to a life table. A life-table CSV is read
/// directly; pair tables from `ingest` are tabulated from one lifetime
/// column chosen by `--margin` (father/mother for couples, child by
/// default for the child tables).
fn fit_law_table(input: &Path, margin: Option<&str>) -> Result<LifeTable> {
    let bad_margin = |m: &str, choices: &str| {
        Error::InvalidInput(format!(
            "--margin {m} not available for {}; expected {choices}",
            input.display()
        ))
    };
    match sniff_input(input)? {
        InputKind::LifeTable => match margin {
            None => LifeTable::read_csv(input),
            Some(m) => Err(Error::InvalidInput(format!(
                "--margin {m} does not apply to a life-table input"
            ))),
        },
        InputKind::Couples => {
            let rows = read_couples_csv(input)?;
            let ages: Vec<f64> = match margin.unwrap_or("father") {
                "father" => rows.iter().map(|r| r.t_f).collect(),
                "mother" => rows.iter().map(|r| r.t_m).collect(),
                m => return Err(bad_margin(m, "father or mother")),
            };
            LifeTable::from_ages_at_death(&ages, MAX_AGE)
        }
        InputKind::ChildParents => {
            let rows = read_child_parents_csv(input)?;
            let ages: Vec<f64> = match margin.unwrap_or("child") {
                "child" => rows.iter().map(|r| r.t_c).collect(),
                "father" => rows.iter().map(|r| r.t_f).collect(),
                "mother" => rows.iter().map(|r| r.t_m).collect(),
                m => return Err(bad_margin(m, "child, father, or mother")),
            };
            LifeTable::from_ages_at_death(&ages, MAX_AGE)
        }
        InputKind::ChildGrandparents => {
            let rows = read_child_grandparents_csv(input)?;
            let ages: Vec<f64> = match margin.unwrap_or("child") {
                "child" => rows.iter().map(|r| r.t_c).collect(),
                m => return Err(bad_margin(m, "child")),
            };
            LifeTable::from_ages_at_death(&ages, MAX_AGE)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit_law(
    law: &str,
    input: &Path,
    margin: Option<&str>,
    out_dir: &Path,
    starts: usize,
    max_evals: usize,
    seed: u64,
    force: bool,
) -> Result<()> {
    let kind: LawKind = law.parse()?;
    let mut manifest = RunManifest::new("fit-law");
    manifest.add_input(input)?;
    create_dir(out_dir)?;
    let report_path = out_dir.join("fit_report.json");
    let curve_path = out_dir.join("fit_curve.csv");
    let manifest_path = out_dir.join("fit_law_manifest.json");
    guard_overwrite(
        &[report_path.as_path(), curve_path.as_path(), manifest_path.as_path()],
        force,
    )?;

    let table = fit_law_table(input, margin)?;
    let mut ages = Vec::new();
    let mut observations = Vec::new();
    for x in 0..=table.omega() {
        let q = table.qx(x)?;
        let l = table.lx(x)?;
        if q > 0.0 && q < 1.0 && l > 0.0 {
            ages.push(x);
            observations.push(Observation {
                age: x as f64,
                value: q,
                exposure: l,
            });
        }
    }
    let opts = FitOptions {
        starts,
        max_evals,
        seed,
    };
    let report = crate::laws::fit(kind, &observations, ObservedRate::DeathProb, &opts)?;
    if !report.converged {
        return Err(Error::NonConvergence(format!(
            "{law} fit did not converge within {max_evals} evaluations per start"
        )));
    }

    write_json(&report_path, &report)?;
    let mut w = csv::Writer::from_path(&curve_path)
        .map_err(|e| Error::io(&curve_path, std::io::Error::other(e.to_string())))?;
    w.write_record(["age", "mu_hat", "mu_fit", "qx_fit"])?;
    for (&x, obs) in ages.iter().zip(&observations) {
        w.write_record(&[
            x.to_string(),
            (-(1.0 - obs.value).ln()).to_string(),
            report.params.year_hazard(x).to_string(),
            report.params.one_year_q(x).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&curve_path, e))?;

    manifest.seed = Some(seed);
    manifest.set("law", law);
    if let Some(margin) = margin {
        manifest.set("margin", margin);
    }
    manifest.set("starts", starts);
    manifest.set("max_evals", max_evals);
    manifest.add_output(&report_path);
    manifest.add_output(&curve_path);
    write_json(&manifest_path, &manifest)?;
    println!("fit {law}: loss {:.6e}, wrote {}", report.loss, report_path.display());
    Ok(())
}

// ===== dependence =====

fn load_pairs(pairs: &str, input: &Path) -> Result<Vec<(i32, f64, f64)>> {
    match pairs {
        "couples" => Ok(read_couples_csv(input)?
            .iter()
            .map(|r| (r.cohort_year(), r.t_f, r.t_m))
            .collect()),
        "child_parents" => Ok(read_child_parents_csv(input)?
            .iter()
            .map(|r| (r.cohort_year(), r.t_c, r.parent_mean()))
            .collect()),
        "child_grandparents" => Ok(read_child_grandparents_csv(input)?
            .iter()
            .map(|r| (r.cohort_year(), r.t_c, r.grandparent_mean()))
            .collect()),
        other => Err(Error::InvalidInput(format!(
            "unknown pair table {other:?}; expected couples, child_parents, or child_grandparents"
        ))),
    }
}

/// JSON shape for `dependence --stat spearman`.
#[derive(Debug, Serialize)]
struct SpearmanReport {
    overall: SpearmanResult,
    skipped_cohorts: Vec<SkippedCohort>,
}

/// JSON shape for `dependence --stat copula-fit`.
#[derive(Debug, Serialize)]
struct CopulaFitReport {
    family: CopulaFamily,
    theta: Option<f64>,
    loglik: Option<f64>,
    n: usize,
    at_boundary: bool,
}

#[allow(clippy::too_many_arguments)]
fn cmd_dependence(
    pairs: &str,
    stat: &str,
    input: &Path,
    out_dir: &Path,
    family: &str,
    grid: usize,
    bootstraps: usize,
    resamples: usize,
    seed: u64,
    force: bool,
) -> Result<()> {
    let mut manifest = RunManifest::new("dependence");
    manifest.add_input(input)?;
    create_dir(out_dir)?;
    // One manifest per statistic, so different stats can share an out dir.
    let manifest_path = out_dir.join(format!(
        "dependence_{}_manifest.json",
        stat.replace('-', "_")
    ));
    manifest.seed = Some(seed);
    manifest.set("pairs", pairs);
    manifest.set("stat", stat);

    let rows = load_pairs(pairs, input)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().map(|&(_, x, y)| (x, y)).unzip();

    match stat {
        "spearman" => {
            let json_path = out_dir.join("spearman.json");
            let cohort_path = out_dir.join("cohorts.csv");
            guard_overwrite(
                &[json_path.as_path(), cohort_path.as_path(), manifest_path.as_path()],
                force,
            )?;
            manifest.set("resamples", resamples);
            let overall =
                spearman_ci(&xs, &ys, resamples, subseed(seed, "spearman-overall"))?;
            let scan = spearman_by_cohort(&rows, resamples, seed)?;
            write_json(
                &json_path,
                &SpearmanReport {
                    overall: overall.clone(),
                    skipped_cohorts: scan.skipped,
                },
            )?;
            let mut w = csv::Writer::from_path(&cohort_path)
                .map_err(|e| Error::io(&cohort_path, std::io::Error::other(e.to_string())))?;
            w.write_record(["cohort", "rho", "ci_low", "ci_high", "n"])?;
            for c in &scan.cohorts {
                w.write_record(&[
                    c.cohort.to_string(),
                    c.result.rho.to_string(),
                    c.result.ci_low.to_string(),
                    c.result.ci_high.to_string(),
                    c.result.n.to_string(),
                ])?;
            }
            w.flush().map_err(|e| Error::io(&cohort_path, e))?;
            manifest.add_output(&json_path);
            manifest.add_output(&cohort_path);
            println!(
                "spearman rho {:.4} [{:.4}, {:.4}] on {} pairs",
                overall.rho, overall.ci_low, overall.ci_high, overall.n
            );
        }
        "pqd" => {
            let json_path = out_dir.join("pqd.json");
            guard_overwrite(&[json_path.as_path(), manifest_path.as_path()], force)?;
            manifest.set("grid", grid);
            manifest.set("bootstraps", bootstraps);
            let result = crate::dependence::pqd_test_on_lifetimes(
                &xs, &ys, grid, bootstraps, seed,
            )?;
            write_json(&json_path, &result)?;
            manifest.add_output(&json_path);
            println!(
                "PQD statistic {:.4}, p = {:.4} ({} pairs)",
                result.statistic, result.p_value, result.n
            );
        }
        "copula-fit" => {
            let json_path = out_dir.join("copula_fit.json");
            let surface_path = out_dir.join("density_surface.csv");
            guard_overwrite(
                &[json_path.as_path(), surface_path.as_path(), manifest_path.as_path()],
                force,
            )?;
            let family: CopulaFamily = family.parse()?;
            manifest.set("family", family);
            let pseudo = pseudo_observations(&xs, &ys)?;
            let fit = copulas::fit(family, &pseudo)?;
            write_json(
                &json_path,
                &CopulaFitReport {
                    family,
                    theta: fit.copula.theta(),
                    loglik: fit.log_likelihood.is_finite().then_some(fit.log_likelihood),
                    n: pseudo.len(),
                    at_boundary: fit.at_boundary,
                },
            )?;
            manifest.add_output(&json_path);
            if family != CopulaFamily::Empirical {
                write_density_surface(&surface_path, &fit.copula)?;
                manifest.add_output(&surface_path);
            }
            match fit.copula.theta() {
                Some(theta) => println!(
                    "fitted {family}: theta {theta:.4}, loglik {:.2}",
                    fit.log_likelihood
                ),
                None => println!("fitted {family} on {} pairs", pseudo.len()),
            }
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown statistic {other:?}; expected spearman, pqd, or copula-fit"
            )));
        }
    }
    write_json(&manifest_path, &manifest)?;
    Ok(())
}

/// 51×51 copula density grid on interior points i/52, written as `u,v,c`.
fn write_density_surface(path: &Path, copula: &Copula) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    w.write_record(["u", "v", "c"])?;
    for i in 1..=51 {
        for j in 1..=51 {
            let u = i as f64 / 52.0;
            let v = j as f64 / 52.0;
            w.write_record(&[u.to_string(), v.to_string(), copula.density(u, v)?.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

// ===== price =====

#[derive(Debug, PartialEq)]
enum InputKind {
    LifeTable,
    Couples,
    ChildParents,
    ChildGrandparents,
}

fn sniff_input(path: &Path) -> Result<InputKind> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut header = String::new();
    std::io::BufReader::new(file)
        .read_line(&mut header)
        .map_err(|e| Error::io(path, e))?;
    let header = header.trim();
    if header.starts_with("age,qx") {
        Ok(InputKind::LifeTable)
    } else if header.starts_with("father_id,mother_id") {
        Ok(InputKind::Couples)
    } else if header.starts_with("child_id") && header.contains("gff_birth") {
        Ok(InputKind::ChildGrandparents)
    } else if header.starts_with("child_id") {
        Ok(InputKind::ChildParents)
    } else {
        Err(Error::InvalidInput(format!(
            "{}: unrecognized table header {header:?}",
            path.display()
        )))
    }
}

fn write_pricing_csv(
    path: &Path,
    rows: &[(u32, String, Product, f64, f64)],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    w.write_record(["age", "condition", "product", "value", "rel_diff_pct"])?;
    for (age, condition, product, value, rel) in rows {
        w.write_record(&[
            age.to_string(),
            condition.clone(),
            product.to_string(),
            value.to_string(),
            rel.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_price(
    product: &str,
    input: &Path,
    age: u32,
    partner_age: Option<u32>,
    condition: &str,
    rate: f64,
    horizon: u32,
    family: &str,
    theta: Option<f64>,
    out: &Path,
    force: bool,
) -> Result<()> {
    let product: Product = product.parse()?;
    let condition: Condition = condition.parse()?;
    let disc = Discount::new(rate)?;
    let mut manifest = RunManifest::new("price");
    manifest.add_input(input)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "price".into());
    let manifest_path = manifest_sibling(out, &format!("price_{stem}"));
    guard_overwrite(&[out, manifest_path.as_path()], force)?;
    manifest.set("product", product);
    manifest.set("age", age);
    manifest.set("condition", condition);
    manifest.set("rate", rate);
    manifest.set("horizon", horizon);

    let kind = sniff_input(input)?;
    let row = if product.is_joint() {
        if kind != InputKind::Couples {
            return Err(Error::InvalidInput(
                "joint products need the couples table from `ingest`".into(),
            ));
        }
        if condition != Condition::Baseline {
            return Err(Error::InvalidInput(
                "joint products take a copula, not a parent condition".into(),
            ));
        }
        let couples = read_couples_csv(input)?;
        let father_ages: Vec<f64> = couples.iter().map(|r| r.t_f).collect();
        let mother_ages: Vec<f64> = couples.iter().map(|r| r.t_m).collect();
        let father = LifeTable::from_ages_at_death(&father_ages, MAX_AGE)?;
        let mother = LifeTable::from_ages_at_death(&mother_ages, MAX_AGE)?;
        let family: CopulaFamily = family.parse()?;
        let copula = match (family, theta) {
            (CopulaFamily::Comonotone, None) => Copula::Comonotone,
            (CopulaFamily::Empirical | CopulaFamily::SmoothedEmpirical, Some(_)) => {
                return Err(Error::InvalidInput(format!(
                    "--theta does not apply to the {family} copula"
                )));
            }
            (CopulaFamily::Empirical, None) => {
                Copula::empirical(pseudo_observations(&father_ages, &mother_ages)?)?
            }
            (CopulaFamily::SmoothedEmpirical, None) => {
                Copula::smoothed_empirical(&pseudo_observations(&father_ages, &mother_ages)?)?
            }
            (_, Some(theta)) => Copula::parametric(family, theta)?,
            (_, None) => {
                let pseudo = pseudo_observations(&father_ages, &mother_ages)?;
                copulas::fit(family, &pseudo)?.copula
            }
        };
        let partner = partner_age.unwrap_or(age);
        let jm = JointModel::new(&father, &mother, &copula, age, partner)?;
        let value = jm.value(product, &disc, horizon)?;
        let bounds = jm.bounds(&disc, horizon);
        let independent = match product {
            Product::Joint => bounds.independent.a_joint,
            Product::LastSurvivor => bounds.independent.a_last,
            Product::Widow => bounds.independent.a_widow,
            _ => unreachable!("is_joint() guards the product"),
        };
        let label = match copula.theta() {
            Some(theta) => format!("{}_theta_{theta:.4}", copula.family()),
            None => copula.family().to_string(),
        };
        manifest.set("family", copula.family());
        if let Some(theta) = copula.theta() {
            manifest.set("theta", theta);
        }
        manifest.set("partner_age", partner);
        // rel_diff_pct compares the copula value to the independence value
        // on the same marginals.
        (age, label, product, value, 100.0 * (value - independent) / independent)
    } else {
        match kind {
            InputKind::LifeTable => {
                if condition != Condition::Baseline {
                    return Err(Error::InvalidInput(
                        "conditions need a child_parents or child_grandparents table".into(),
                    ));
                }
                let table = LifeTable::read_csv(input)?;
                let value = single_life_value(&table, product, age, &disc, horizon)?;
                (age, condition.to_string(), product, value, 0.0)
            }
            InputKind::ChildParents => {
                let rows = read_child_parents_csv(input)?;
                let baseline = conditional_table_parents(&rows, age, Condition::Baseline)?;
                if matches!(condition, Condition::GrandparentsAlive(_)) {
                    return Err(Error::InvalidInput(
                        "grandparent conditions need the child_grandparents table".into(),
                    ));
                }
                let table = conditional_table_parents(&rows, age, condition)?;
                let cv = conditional_value(&table, &baseline, product, &disc, horizon)?;
                (age, condition.to_string(), product, cv.value, cv.rel_diff_pct)
            }
            InputKind::ChildGrandparents => {
                let rows = read_child_grandparents_csv(input)?;
                let baseline = grandparent_baseline_table(&rows, age)?;
                let table = match condition {
                    Condition::Baseline => grandparent_baseline_table(&rows, age)?,
                    Condition::GrandparentsAlive(k) => {
                        conditional_table_grandparents(&rows, age, k)?
                    }
                    other => {
                        return Err(Error::InvalidInput(format!(
                            "condition {other} needs the child_parents table"
                        )));
                    }
                };
                let cv = conditional_value(&table, &baseline, product, &disc, horizon)?;
                (age, condition.to_string(), product, cv.value, cv.rel_diff_pct)
            }
            InputKind::Couples => {
                return Err(Error::InvalidInput(
                    "single-life products need a life table or child table, not couples".into(),
                ));
            }
        }
    };

    write_pricing_csv(out, &[row.clone()])?;
    manifest.add_output(out);
    write_json(&manifest_path, &manifest)?;
    println!(
        "{} at age {}: {:.6} ({:+.2}% vs reference)",
        row.2, row.0, row.3, row.4
    );
    Ok(())
}

// ===== report =====

#[derive(Debug, Serialize)]
struct CommandReport {
    manifest: String,
    command: String,
    version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    settings: BTreeMap<String, String>,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

#[derive(Debug, Serialize)]
struct Report {
    tool: String,
    version: String,
    commands: Vec<CommandReport>,
}

fn find_manifests(dir: &Path, found: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    paths.sort();
    for path in paths {
        if path.is_dir() {
            find_manifests(&path, found)?;
        } else if path
            .file_name()
            .is_some_and(|n| n.to_string_lossy().ends_with("_manifest.json"))
        {
            found.push(path);
        }
    }
    Ok(())
}

fn cmd_report(run_dir: &Path, out: &Path, force: bool) -> Result<()> {
    guard_overwrite(&[out], force)?;
    let mut manifest_paths = Vec::new();
    find_manifests(run_dir, &mut manifest_paths)?;
    if manifest_paths.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no run manifests found under {}",
            run_dir.display()
        )));
    }
    let mut commands = Vec::new();
    for path in &manifest_paths {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let run: RunManifest = serde_json::from_str(&text)?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        let mut outputs = Vec::new();
        for name in &run.outputs {
            let file = dir.join(name);
            if !file.is_file() {
                return Err(Error::InvalidInput(format!(
                    "manifest {} lists missing output {name}",
                    path.display()
                )));
            }
            outputs.push(FileDigest {
                file: relative_to(&file, run_dir),
                sha256: sha256_file(&file)?,
            });
        }
        commands.push(CommandReport {
            manifest: relative_to(path, run_dir),
            command: run.command,
            version: run.version,
            seed: run.seed,
            settings: run.settings,
            inputs: run.inputs,
            outputs,
        });
    }
    let report = Report {
        tool: "jointlife".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        commands,
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_json(out, &report)?;
    println!(
        "consolidated {} manifests into {}",
        manifest_paths.len(),
        out.display()
    );
    Ok(())
}

fn relative_to(path: &Path, base: &Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .to_string_lossy()
        .into_owned()
}
