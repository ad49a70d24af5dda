use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use chi2_regimes::asymptotics::TheoryReport;
use chi2_regimes::io;
use chi2_regimes::montecarlo::{
    run_experiment, write_replicates_csv, write_sweep_csv, DistSpec, ExperimentConfig,
    ExperimentResult, SweepConfig, RAW_RETAIN_MAX,
};
use chi2_regimes::{CellDistribution, SampleCounts, Thresholds};

use crate::args::{DistArgs, DistKind, GofArgs, SimulateArgs, SweepArgs, TheoryArgs};
use crate::error::{CliError, CliResult};
use crate::gof::gof_report;

pub const WORKERS_ENV: &str = "CHI2_REGIMES_WORKERS";

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn resolve_dist(a: &DistArgs) -> CliResult<CellDistribution> {
    if let Some(path) = &a.probs {
        let d = CellDistribution::custom(io::read_probs(path)?)?;
        if let Some(m) = a.m {
            if m != d.m() {
                return Err(chi2_regimes::Error::DimensionMismatch {
                    expected: m,
                    found: d.m(),
                }
                .into());
            }
        }
        return Ok(d);
    }
    let m =
        a.m.ok_or_else(|| usage("--m is required unless --probs is given"))?;
    let d = match (a.dist, a.alpha) {
        (DistKind::Uniform, None) => CellDistribution::uniform(m)?,
        (DistKind::Uniform, Some(_)) => {
            return Err(usage("--alpha only applies to --dist powerlaw"))
        }
        (DistKind::Powerlaw, Some(alpha)) => CellDistribution::power_law(alpha, m)?,
        (DistKind::Powerlaw, None) => return Err(usage("--dist powerlaw needs --alpha")),
    };
    Ok(d)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

fn load_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn workers_from_env() -> CliResult<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            usage(format!(
                "{WORKERS_ENV} must be a non-negative integer, got '{v}'"
            ))
        }),
        Err(_) => Ok(None),
    }
}

fn anchor_probs(dist: &mut DistSpec, config: &Path) {
    if let DistSpec::Custom { probs_file } = dist {
        *probs_file = io::resolve_relative(config, probs_file);
    }
}

pub fn gof(a: &GofArgs) -> CliResult<()> {
    let thresholds = Thresholds::new(a.lambda_lo, a.lambda_hi)?;
    let d = resolve_dist(&a.dist)?;
    let counts = SampleCounts::new(d.m(), io::read_counts(&a.counts)?)?;
    let report = gof_report(&d, &counts, a.convention, thresholds)?;
    let json = to_json(&report);
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        write_file(&dir.join("gof.json"), &json)?;
    }
    print!("{json}");
    Ok(())
}

fn summary_line(r: &ExperimentResult) -> String {
    format!(
        "n={} m={} R={} seed={} lambda_hat={} regime={} emp_mean={:.4} emp_var={:.4} ks_normal={:.4} tv_poisson={} prob_at_zero={:.4}",
        r.config.n,
        r.config.m,
        r.config.replicates,
        r.config.seed,
        r.lambda_hat,
        r.regime.name(),
        r.empirical_mean,
        r.empirical_var,
        r.ks_normal,
        r.tv_poisson.map_or("n/a".to_string(), |v| format!("{v:.4}")),
        r.prob_at_zero,
    )
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let mut cfg: ExperimentConfig = load_config(&a.config)?;
    anchor_probs(&mut cfg.distribution, &a.config);
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    if let Some(c) = a.convention {
        cfg.convention = c;
    }
    if let Some(v) = a.lambda_lo {
        cfg.lambda_lo = v;
    }
    if let Some(v) = a.lambda_hi {
        cfg.lambda_hi = v;
    }
    if let Some(w) = workers_from_env()? {
        cfg.workers = Some(w);
    }
    if a.csv && cfg.replicates > RAW_RETAIN_MAX {
        cfg.retain_raw = true;
    }
    let res = run_experiment(&cfg)?;
    ensure_dir(&a.out)?;
    let result_path = a.out.join("result.json");
    write_file(&result_path, &to_json(&res))?;
    let mut line = format!("{} -> {}", summary_line(&res), result_path.display());
    if a.csv {
        let csv_path = a.out.join("replicates.csv");
        let raw = res.raw.as_deref().unwrap_or_default();
        write_replicates_csv(&csv_path, raw)?;
        line.push_str(&format!(", {}", csv_path.display()));
    }
    println!("{line}");
    Ok(())
}

pub fn sweep(a: &SweepArgs) -> CliResult<()> {
    let mut cfg: SweepConfig = load_config(&a.config)?;
    anchor_probs(&mut cfg.distribution, &a.config);
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    if let Some(c) = a.convention {
        cfg.convention = c;
    }
    if let Some(v) = a.lambda_lo {
        cfg.lambda_lo = v;
    }
    if let Some(v) = a.lambda_hi {
        cfg.lambda_hi = v;
    }
    if let Some(w) = workers_from_env()? {
        cfg.workers = Some(w);
    }
    let results = cfg.run()?;
    ensure_dir(&a.out)?;
    let csv_path: PathBuf = a.out.join("sweep.csv");
    write_sweep_csv(&csv_path, &results)?;
    write_file(&a.out.join("sweep.json"), &to_json(&results))?;
    for r in &results {
        println!("{}", summary_line(r));
    }
    println!("{} points -> {}", results.len(), csv_path.display());
    Ok(())
}

pub fn theory(a: &TheoryArgs) -> CliResult<()> {
    let d = resolve_dist(&a.dist)?;
    let report = TheoryReport::compute(&d, a.n, a.delta, a.epsilon)?;
    print!("{}", to_json(&report));
    Ok(())
}
