//! The subcommands. Each writes its table to a file or to `out`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use evi_core::asymptotics::{amse_with, s_moments, wls_variance_factor};
use evi_core::estimators::{evi_path, ridge_fit_tuned};
use evi_core::montecarlo::run_simulation;
use evi_core::second_order::resolve_rho;
use evi_core::spacings::log_spacings;
use evi_core::{AmseVariant, DistributionSpec, EstimatorId, Family, RhoMethod, SimulationConfig, SimulationSummary};

use crate::dataset::{read_dataset, DatasetOptions, HeaderMode};
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, fmt_f64, write_atomic, RunMetadata};
use crate::{AmseChoice, DiagnoseArgs, Dist, EstimateArgs, OptimalKArgs, SimulateArgs};

pub const PATH_HEADER: [&str; 4] = ["k", "estimator", "rho_used", "gamma_hat"];
pub const SUMMARY_HEADER: [&str; 7] = ["estimator", "k", "mean", "bias", "mse", "variance", "missing"];
pub const DIAGNOSE_HEADER: [&str; 9] =
    ["k", "s1", "s2", "s_dot", "s_ddot", "s1_limit", "s2_limit", "amse", "exact_variance"];

pub const SUMMARY_FILE: &str = "summary.csv";
pub const DATA_URL: &str = "https://lstat.kuleuven.be/Wiley/";
pub const SECURA_ROWS: usize = 371;
pub const CONDROZ_ROWS: usize = 1505;

const RR_PENALTY_RULE: &str =
    "penalty = m*k, m in {0,0.5,1,2,4,8,16} minimising the plug-in AMSE at the unpenalised fit; ties to smaller m";

/// Below this many order statistics estimates are too noisy to be useful.
const SMALL_K_WARNING: usize = 10;

/// Core errors caused by flag values map to exit 4, the rest to exit 3.
fn core_error(e: evi_core::Error) -> CliError {
    use evi_core::Error as E;
    match e {
        E::InvalidConfig(_)
        | E::InvalidRho(_)
        | E::InvalidParameter { .. }
        | E::KOutOfRange { .. }
        | E::KTooSmall { .. }
        | E::GridEmpty
        | E::EmptyEstimatorSet
        | E::TooFewReps { .. }
        | E::NegativePenalty(_) => CliError::config(e.to_string()),
        _ => CliError::estimation(e.to_string()),
    }
}

fn emit(out: &mut impl Write, path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => out.write_all(bytes).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn k_bounds(k: Option<usize>, k_min: Option<usize>, k_max: Option<usize>, n: usize) -> CliResult<(usize, usize)> {
    let (lo, hi) = match k {
        Some(k) => (k, k),
        None => (k_min.unwrap_or(5.min(n.saturating_sub(1))), k_max.unwrap_or(n.saturating_sub(1))),
    };
    if lo < 2 || lo > hi || hi + 1 > n {
        return Err(CliError::config(format!("need 2 <= k_min <= k_max <= n-1 = {}, got [{lo}, {hi}]", n as i64 - 1)));
    }
    Ok((lo, hi))
}

fn estimator_list(ids: &[EstimatorId]) -> String {
    ids.iter().map(|e| e.as_str()).collect::<Vec<_>>().join(",")
}

pub fn estimate(a: &EstimateArgs, command_line: &[String], out: &mut impl Write) -> CliResult<()> {
    if !a.delimiter.is_ascii() {
        return Err(CliError::config(format!("delimiter must be a single ASCII character, got '{}'", a.delimiter)));
    }
    let opts = DatasetOptions {
        column: a.column.clone().unwrap_or_default(),
        delimiter: a.delimiter as u8,
        header: match (a.header, a.no_header) {
            (true, _) => HeaderMode::Present,
            (_, true) => HeaderMode::Absent,
            _ => HeaderMode::Auto,
        },
    };
    let data = read_dataset(&a.dataset, &opts)?;
    let tail = data.tail()?;
    let (k_min, k_max) = k_bounds(a.k, a.k_min, a.k_max, tail.n())?;
    if a.estimators.is_empty() {
        return Err(CliError::config("no estimators selected"));
    }
    if k_min < SMALL_K_WARNING {
        eprintln!("warning: k below {SMALL_K_WARNING} gives highly variable estimates");
    }

    let rho = if a.estimators.iter().any(|e| e.needs_rho()) {
        let r = resolve_rho(&tail, &a.rho, k_max).map_err(core_error)?;
        eprintln!("rho ({}): {r}", a.rho);
        Some(r)
    } else {
        None
    };
    let fixed = rho.map_or(a.rho.clone(), RhoMethod::Fixed);
    let mut paths = Vec::with_capacity(a.estimators.len());
    for &id in &a.estimators {
        let path = evi_path(&tail, id, &fixed, k_min, k_max).map_err(core_error)?;
        let negative: Vec<usize> =
            path.k_values.iter().zip(&path.estimates).filter(|(_, g)| **g < 0.0).map(|(k, _)| *k).collect();
        if let Some(first) = negative.first() {
            eprintln!("warning: {id} is negative at {} values of k (first k={first})", negative.len());
        }
        paths.push(path);
    }

    let mut rows = Vec::new();
    for i in 0..=(k_max - k_min) {
        for p in &paths {
            rows.push(vec![
                p.k_values[i].to_string(),
                p.estimator.to_string(),
                p.rho_used[i].map_or_else(|| "NA".to_string(), fmt_f64),
                fmt_f64(p.estimates[i]),
            ]);
        }
    }
    emit(out, a.out.as_deref(), &csv_bytes(&PATH_HEADER, &rows))?;
    if let Some(path) = &a.out {
        let mut meta = RunMetadata::new(command_line);
        meta.push("dataset", a.dataset.display());
        meta.push("column", data.column_name.as_deref().unwrap_or("(unnamed)"));
        meta.push("n", tail.n());
        meta.push("estimators", estimator_list(&a.estimators));
        meta.push("rho_method", &a.rho);
        meta.push("rho_resolved", rho.map_or_else(|| "NA".to_string(), fmt_f64));
        meta.push("k_min", k_min);
        meta.push("k_max", k_max);
        if let (true, Some(r)) = (a.estimators.contains(&EstimatorId::Rr), rho) {
            meta.push("rr_penalty_rule", RR_PENALTY_RULE);
            let full = log_spacings(&tail, k_max).map_err(core_error)?;
            let mut chosen = Vec::with_capacity(k_max - k_min + 1);
            for k in k_min..=k_max {
                let z = full.truncated(k).map_err(core_error)?;
                let (_, penalty) = ridge_fit_tuned(&z, r).map_err(core_error)?;
                chosen.push((penalty / k as f64).to_string());
            }
            meta.push("rr_penalty_multipliers", chosen.join(","));
        }
        write_atomic(&sidecar_path(path), meta.render().as_bytes())?;
    }
    Ok(())
}

fn require(name: &str, v: Option<f64>, dist: &str) -> CliResult<f64> {
    v.ok_or_else(|| CliError::config(format!("--{name} is required for --dist {dist}")))
}

fn reject(name: &str, v: Option<f64>, dist: &str) -> CliResult<()> {
    match v {
        Some(_) => Err(CliError::config(format!("--{name} does not apply to --dist {dist}"))),
        None => Ok(()),
    }
}

/// Builds the distribution from the flags; `--gamma` stands in for the
/// parameter that sets the index where that is unambiguous.
pub fn distribution(a: &SimulateArgs) -> CliResult<DistributionSpec> {
    let family = match a.dist {
        Dist::Pareto => {
            reject("alpha", a.alpha, "pareto")?;
            reject("lambda", a.lambda, "pareto")?;
            reject("tau", a.tau, "pareto")?;
            Family::Pareto { gamma: require("gamma", a.gamma, "pareto")? }
        }
        Dist::Burr => {
            reject("gamma", a.gamma, "burr")?;
            reject("alpha", a.alpha, "burr")?;
            Family::Burr {
                eta: a.eta,
                tau: require("tau", a.tau, "burr")?,
                lambda: require("lambda", a.lambda, "burr")?,
            }
        }
        Dist::Frechet => {
            reject("lambda", a.lambda, "frechet")?;
            reject("tau", a.tau, "frechet")?;
            let alpha = match (a.alpha, a.gamma) {
                (Some(al), None) => al,
                (None, Some(g)) => 1.0 / g,
                _ => return Err(CliError::config("--dist frechet takes exactly one of --alpha and --gamma")),
            };
            Family::Frechet { alpha }
        }
        Dist::Loggamma => {
            reject("tau", a.tau, "loggamma")?;
            let lambda = match (a.lambda, a.gamma) {
                (Some(l), None) => l,
                (None, Some(g)) => 1.0 / g,
                _ => return Err(CliError::config("--dist loggamma takes exactly one of --lambda and --gamma")),
            };
            Family::LogGamma { lambda, alpha: require("alpha", a.alpha, "loggamma")? }
        }
    };
    DistributionSpec::new(family).map_err(core_error)
}

pub fn simulation_config(a: &SimulateArgs) -> CliResult<SimulationConfig> {
    let spec = distribution(a)?;
    let mut config = SimulationConfig::new(spec, a.n, a.reps, a.seed);
    let (k_min, k_max) = k_bounds(None, a.k_min, a.k_max, a.n)?;
    config.k_min = k_min;
    config.k_max = k_max;
    config.k_step = a.k_step;
    config.estimators = a.estimators.clone();
    config.rho_method = a.rho.clone();
    config.validate().map_err(core_error)?;
    Ok(config)
}

pub fn summary_rows(summary: &SimulationSummary) -> Vec<Vec<String>> {
    summary
        .cells
        .iter()
        .map(|c| {
            vec![
                c.estimator.to_string(),
                c.k.to_string(),
                fmt_f64(c.mean),
                fmt_f64(c.bias),
                fmt_f64(c.mse),
                fmt_f64(c.variance),
                c.missing.to_string(),
            ]
        })
        .collect()
}

fn rho_stats(meta: &mut RunMetadata, rhos: &[Option<f64>]) {
    let mut ok: Vec<f64> = rhos.iter().flatten().copied().collect();
    meta.push("rho_resolved_count", ok.len());
    meta.push("rho_failed_count", rhos.len() - ok.len());
    if ok.is_empty() {
        return;
    }
    ok.sort_by(f64::total_cmp);
    let mid = ok.len() / 2;
    let median = if ok.len().is_multiple_of(2) { 0.5 * (ok[mid - 1] + ok[mid]) } else { ok[mid] };
    meta.push("rho_resolved_min", ok[0]);
    meta.push("rho_resolved_median", median);
    meta.push("rho_resolved_max", ok[ok.len() - 1]);
    meta.push("rho_resolved_mean", ok.iter().sum::<f64>() / ok.len() as f64);
}

pub fn simulate(a: &SimulateArgs, command_line: &[String], out: &mut impl Write) -> CliResult<()> {
    let config = simulation_config(a)?;
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let started = Instant::now();
    let summary = run_simulation(&config).map_err(core_error)?;
    let elapsed = started.elapsed();

    let path = a.out.join(SUMMARY_FILE);
    write_atomic(&path, &csv_bytes(&SUMMARY_HEADER, &summary_rows(&summary)))?;

    let mut meta = RunMetadata::new(command_line);
    meta.push("master_seed", config.master_seed);
    meta.push("generator", summary.generator);
    meta.push("seed_mix", summary.seed_mix);
    meta.push("distribution", config.spec.family());
    meta.push("true_gamma", summary.true_gamma);
    meta.push("n", config.n);
    meta.push("reps", config.reps);
    meta.push("k_min", config.k_min);
    meta.push("k_max", config.k_max);
    meta.push("k_step", config.k_step);
    meta.push("estimators", estimator_list(&config.estimators));
    meta.push("rho_method", &config.rho_method);
    if config.estimators.contains(&EstimatorId::Rr) {
        meta.push("rr_penalty_rule", RR_PENALTY_RULE);
    }
    rho_stats(&mut meta, &summary.rho_per_rep);
    meta.push_elapsed(elapsed);
    write_atomic(&sidecar_path(&path), meta.render().as_bytes())?;

    writeln!(out, "{}", path.display()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

pub fn diagnose(a: &DiagnoseArgs, out: &mut impl Write) -> CliResult<()> {
    if !(a.rho.is_finite() && a.rho < 0.0) {
        return Err(CliError::config(format!("--rho must be negative, got {}", a.rho)));
    }
    if !(a.gamma.is_finite() && a.gamma > 0.0) {
        return Err(CliError::config(format!("--gamma must be positive, got {}", a.gamma)));
    }
    if a.k_min < 2 || a.k_min > a.k_max || a.k_step == 0 {
        return Err(CliError::config(format!(
            "need 2 <= k_min <= k_max and k_step >= 1, got [{}, {}] step {}",
            a.k_min, a.k_max, a.k_step
        )));
    }
    let variant = match a.amse {
        AmseChoice::Derivation => AmseVariant::Derivation,
        AmseChoice::Displayed => AmseVariant::Displayed,
    };
    let mut rows = Vec::new();
    for k in (a.k_min..=a.k_max).step_by(a.k_step) {
        let s = s_moments(k, a.rho).map_err(core_error)?;
        let amse = amse_with(a.gamma, k, a.rho, variant).map_err(core_error)?;
        let exact = a.gamma * a.gamma * wls_variance_factor(k, a.rho).map_err(core_error)? / k as f64;
        rows.push(
            std::iter::once(k.to_string())
                .chain([s.s1, s.s2, s.s_dot, s.s_ddot, s.s1_limit, s.s2_limit, amse, exact].map(fmt_f64))
                .collect(),
        );
    }
    emit(out, a.out.as_deref(), &csv_bytes(&DIAGNOSE_HEADER, &rows))
}

/// `(k, mse)` pairs of one estimator from a summary file, skipping cells
/// without a finite MSE.
pub fn read_summary_mse(path: &Path, estimator: EstimatorId) -> CliResult<Vec<(usize, f64)>> {
    let parse_err = |e: csv::Error| CliError::parse(format!("{}: {e}", path.display()));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(parse_err)?;
    let headers = reader.headers().map_err(parse_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::parse(format!("{}: no '{name}' column", path.display())))
    };
    let (ce, ck, cm) = (col("estimator")?, col("k")?, col("mse")?);

    let mut found = false;
    let mut pairs = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(parse_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let id: EstimatorId =
            field(ce).parse().map_err(|e| CliError::parse(format!("{}: line {line}: {e}", path.display())))?;
        let k: usize = field(ck)
            .parse()
            .map_err(|_| CliError::parse(format!("{}: line {line}: bad k '{}'", path.display(), field(ck))))?;
        let mse: f64 = field(cm)
            .parse()
            .map_err(|_| CliError::parse(format!("{}: line {line}: bad mse '{}'", path.display(), field(cm))))?;
        if id == estimator {
            found = true;
            if mse.is_finite() {
                pairs.push((k, mse));
            }
        }
    }
    if !found {
        return Err(CliError::lookup(format!("estimator {estimator} not present in {}", path.display())));
    }
    Ok(pairs)
}

pub fn optimal_k(a: &OptimalKArgs, out: &mut impl Write) -> CliResult<()> {
    let pairs = read_summary_mse(&a.summary, a.estimator)?;
    if pairs.is_empty() {
        return Err(CliError::lookup(format!(
            "estimator {} has no finite MSE in {}",
            a.estimator,
            a.summary.display()
        )));
    }
    let k0 = evi_core::estimators::optimal_k(&pairs).map_err(|e| CliError::parse(e.to_string()))?;
    let mse = pairs.iter().find(|(k, _)| *k == k0).map(|(_, m)| *m).expect("k0 comes from pairs");
    writeln!(out, "k0={k0}\nmse={}", fmt_f64(mse)).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

pub fn fetch_note(out: &mut impl Write) -> CliResult<()> {
    writeln!(
        out,
        "The example datasets are not bundled. Download them from\n  {DATA_URL}\n\
         Expected row counts for integrity checking:\n  secura   {SECURA_ROWS}\n  condroz  {CONDROZ_ROWS}"
    )
    .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}
