//! Command implementations. Each returns the list of files it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use mcbp::bench::{run_scaling, ScalingConfig};
use mcbp::data::{load_csv, preprocess, standardize, write_csv, CsvOptions, Dataset, PreprocessOptions};
use mcbp::experiment::{run_experiment, write_table, ExperimentConfig, ExperimentOutcome, Strategy};
use mcbp::knn::default_k;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig, Source};
use crate::svg::{scatter, Style};
use crate::CliError;

/// A named dataset ready for the pipeline.
pub struct Loaded {
    pub name: String,
    pub data: Dataset,
}

fn write_file(path: &Path, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    written.push(path.to_path_buf());
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))
}

fn load_one(path: &Path, cfg: &RunConfig) -> Result<Loaded, CliError> {
    let options = CsvOptions {
        has_header: cfg.header,
        label_column: cfg.label_column.clone(),
        drop_missing: false,
    };
    let data = load_csv(path, &options)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Ok(Loaded { name, data })
}

/// Loads every dataset of the run. Failures are returned per source so that
/// multi-dataset experiments can carry on.
pub fn load_all(cfg: &RunConfig) -> Vec<(String, Result<Loaded, CliError>)> {
    match &cfg.source {
        Source::Files(paths) => paths
            .iter()
            .map(|p| (p.display().to_string(), load_one(p, cfg)))
            .collect(),
        Source::Generator(spec) => {
            let seed = cfg.seeds[0];
            let loaded = spec
                .generate(seed)
                .map(|data| Loaded {
                    name: spec.name().to_string(),
                    data,
                })
                .map_err(CliError::from);
            vec![(spec.to_string(), loaded)]
        }
    }
}

fn resolve_k(cfg: &RunConfig, n: usize) -> Result<usize, CliError> {
    match cfg.k {
        Some(k) => Ok(k),
        None => Ok(default_k(n)?),
    }
}

pub fn cmd_curvature(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(&cfg.out)?;
    let mut written = Vec::new();
    for (_, loaded) in load_all(cfg) {
        let Loaded { name, data } = loaded?;
        let input = if cfg.standardize {
            standardize(&data)
        } else {
            data.clone()
        };
        let k = resolve_k(cfg, input.n())?;
        let report = mcbp::mcbp(&input, k, cfg.p)?;
        info!(
            "{name}: n = {}, m = {}, k = {k}, threshold {:.4}, {} boundary points",
            input.n(),
            input.m(),
            report.threshold,
            report.boundary_count()
        );
        if report.degenerate_scores {
            warn!("{name}: all curvature scores are equal, no boundary points flagged");
        }

        if cfg.wants(Format::Csv) {
            let path = cfg.out.join(format!("{name}_curvature.csv"));
            report.save_csv(&path)?;
            written.push(path);
        }
        if cfg.wants(Format::Json) {
            write_file(
                &cfg.out.join(format!("{name}_curvature.json")),
                &report.to_json()?,
                &mut written,
            )?;
        }
        if cfg.wants(Format::Svg) {
            if data.m() == 2 {
                let pts: Vec<(f64, f64)> = (0..data.n()).map(|i| (data.point(i)[0], data.point(i)[1])).collect();
                let plots = [
                    ("raw", scatter(&format!("{name}: data"), &pts, Style::Plain)),
                    (
                        "heatmap",
                        scatter(
                            &format!("{name}: curvature"),
                            &pts,
                            Style::Heat(&report.normalized_scores),
                        ),
                    ),
                    (
                        "boundary",
                        scatter(
                            &format!("{name}: boundary points (p = {})", cfg.p),
                            &pts,
                            Style::Overlay(&report.boundary_flags),
                        ),
                    ),
                ];
                for (suffix, svg) in plots {
                    write_file(&cfg.out.join(format!("{name}_{suffix}.svg")), &svg, &mut written)?;
                }
            } else {
                warn!("{name}: SVG plots need 2-D data, got {} dimensions; skipped", data.m());
            }
        }
    }
    Ok(written)
}

#[derive(Serialize)]
struct Failure {
    dataset: String,
    strategy: Option<Strategy>,
    error: String,
}

#[derive(Serialize)]
struct ExperimentFile<'a> {
    p: f64,
    k: Option<usize>,
    seeds: &'a [u64],
    mcs_candidates: &'a [usize],
    outcomes: Vec<&'a ExperimentOutcome>,
    failures: &'a [Failure],
}

pub fn cmd_experiment(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(&cfg.out)?;
    let mut failures = Vec::new();
    let mut first_error = None;
    let mut datasets = Vec::new();
    for (source, loaded) in load_all(cfg) {
        match loaded {
            Ok(mut l) => {
                if cfg.standardize {
                    l.data = preprocess(&l.data, PreprocessOptions::default())?;
                }
                datasets.push(l);
            }
            Err(e) => {
                warn!("{source}: {e}");
                failures.push(Failure {
                    dataset: source,
                    strategy: None,
                    error: e.to_string(),
                });
                first_error.get_or_insert(e);
            }
        }
    }

    let exp = ExperimentConfig {
        k: cfg.k,
        p: cfg.p,
        seeds: cfg.seeds.clone(),
        mcs_candidates: cfg.mcs.clone(),
        n_clusters: cfg.n_clusters,
    };
    let units: Vec<(&Loaded, Strategy)> = datasets
        .iter()
        .flat_map(|d| cfg.strategies.iter().map(move |&s| (d, s)))
        .collect();
    let results: Vec<_> = units
        .par_iter()
        .map(|&(d, s)| (d, s, run_experiment(&d.name, &d.data, s, &exp)))
        .collect();

    let mut outcomes = Vec::new();
    for (d, s, r) in results {
        match r {
            Ok(o) => {
                if o.row.failures > 0 {
                    warn!(
                        "{} / {s}: {} of {} runs failed",
                        d.name,
                        o.row.failures,
                        o.row.runs + o.row.failures
                    );
                }
                outcomes.push(o);
            }
            Err(e) => {
                warn!("{} / {s}: {e}", d.name);
                failures.push(Failure {
                    dataset: d.name.clone(),
                    strategy: Some(s),
                    error: e.to_string(),
                });
                first_error.get_or_insert(CliError::from(e));
            }
        }
    }

    let mut written = Vec::new();
    if cfg.wants(Format::Csv) {
        let rows: Vec<_> = outcomes.iter().map(|o| o.row.clone()).collect();
        let mut buf = Vec::new();
        write_table(&rows, &mut buf)?;
        write_file(&cfg.out.join("table.csv"), &String::from_utf8_lossy(&buf), &mut written)?;
    }
    if cfg.wants(Format::Json) {
        let file = ExperimentFile {
            p: cfg.p,
            k: cfg.k,
            seeds: &cfg.seeds,
            mcs_candidates: &cfg.mcs,
            outcomes: outcomes.iter().collect(),
            failures: &failures,
        };
        let json = serde_json::to_string_pretty(&file).map_err(mcbp::Error::from)?;
        write_file(&cfg.out.join("table.json"), &json, &mut written)?;
    }
    if cfg.wants(Format::Svg) && cfg.formats.len() == 1 {
        warn!("experiment results have no SVG form; nothing written");
    }
    match (outcomes.is_empty(), first_error) {
        (true, Some(e)) => Err(e),
        _ => Ok(written),
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    generator: &'a crate::config::GeneratorSpec,
    spec: String,
    seed: u64,
    n: usize,
    m: usize,
    version: &'static str,
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let Source::Generator(spec) = &cfg.source else {
        return Err(CliError::Usage("synth needs --generator".into()));
    };
    ensure_dir(&cfg.out)?;
    let mut written = Vec::new();
    for &seed in &cfg.seeds {
        let data = spec.generate(seed)?;
        let stem = format!("{}_n{}_seed{seed}", spec.name(), data.n());
        let csv = cfg.out.join(format!("{stem}.csv"));
        write_csv(&data, &csv)?;
        written.push(csv);
        let sidecar = Sidecar {
            generator: spec,
            spec: spec.to_string(),
            seed,
            n: data.n(),
            m: data.m(),
            version: env!("CARGO_PKG_VERSION"),
        };
        let json = serde_json::to_string_pretty(&sidecar).map_err(mcbp::Error::from)?;
        write_file(&cfg.out.join(format!("{stem}.json")), &json, &mut written)?;
    }
    Ok(written)
}

pub fn cmd_bench(config: &ScalingConfig, out: &Path, formats: &[Format]) -> Result<Vec<PathBuf>, CliError> {
    let report = run_scaling(config)?;
    print!("{}", report.summary());
    ensure_dir(out)?;
    let mut written = Vec::new();
    let stem = format!("scaling_{}", config.axis);
    if formats.contains(&Format::Csv) {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_file(
            &out.join(format!("{stem}.csv")),
            &String::from_utf8_lossy(&buf),
            &mut written,
        )?;
    }
    if formats.contains(&Format::Json) {
        let json = serde_json::to_string_pretty(&report).map_err(mcbp::Error::from)?;
        write_file(&out.join(format!("{stem}.json")), &json, &mut written)?;
    }
    Ok(written)
}
