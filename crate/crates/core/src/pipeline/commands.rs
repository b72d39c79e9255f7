//! Command implementations shared by the CLI binary and the integration
//! tests. Every command is deterministic for a fixed config and seed, and
//! idempotent with respect to its output files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::features::{extract_matrix, save_matrix, FeatureMatrix};
use crate::learn::{fit_classifier, loso_cv, random_search, ClassifierSpec, ForestParams};
use crate::seeding;
use crate::select::{
    channel_curve, cife, ife, rank_channels, rfe, FeatureSelection, SelectionMethod,
};
use crate::signal::{drop_single_class_subjects, load_dataset, save_recordings, synth_dataset, synth_recordings, Preprocess, SubjectDataset};

use super::config::{DatasetSource, PipelineConfig};
use super::report::{
    CurvePoint, DatasetSummary, MetricsBlock, RunReport, SearchBlock, SelectionComparison,
};

pub struct CommandOutput {
    pub report: RunReport,
    pub files: Vec<PathBuf>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn dataset_summary(ds: &SubjectDataset) -> DatasetSummary {
    DatasetSummary {
        n_subjects: ds.subjects.len(),
        n_epochs: ds.n_epochs(),
        channels: ds.channels(),
        provenance: ds.provenance.clone(),
    }
}

/// Materialize the configured dataset: load and preprocess from a manifest,
/// or generate synthetically. Single-class subjects are dropped either way.
pub fn load_or_generate(cfg: &PipelineConfig) -> Result<SubjectDataset> {
    let ds = match &cfg.dataset {
        DatasetSource::Manifest { path } => load_dataset(path)?,
        DatasetSource::Synth(s) => synth_dataset(&s.to_spec(cfg.seed))?,
    };
    drop_single_class_subjects(&ds)
}

fn extract(cfg: &PipelineConfig, ds: &SubjectDataset) -> Result<(FeatureMatrix, crate::features::ExtractionReport)> {
    let subset: Option<&[String]> = if cfg.features.channels.is_empty() {
        None
    } else {
        Some(&cfg.features.channels)
    };
    extract_matrix(ds, subset, cfg.features.include_mse, &cfg.features.entropy)
}

fn threads_in_use(cfg: &PipelineConfig) -> usize {
    cfg.threads.unwrap_or_else(rayon::current_num_threads)
}

/// Run `f` inside a Rayon pool of the configured width (process default
/// when unset). Results are thread-count independent by construction.
pub fn with_thread_pool<T: Send>(cfg: &PipelineConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match cfg.threads {
        None => f(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(f),
    }
}

/// Generate a synthetic dataset and write it in the on-disk format.
pub fn cmd_synth(cfg: &PipelineConfig, out_dir: &Path) -> Result<CommandOutput> {
    let t0 = Instant::now();
    let DatasetSource::Synth(synth_cfg) = &cfg.dataset else {
        return Err(Error::Config("synth requires [dataset.synth]".into()));
    };
    let spec = synth_cfg.to_spec(cfg.seed);
    let recordings = synth_recordings(&spec)?;
    let dataset_dir = out_dir.join("dataset");
    ensure_dir(&dataset_dir)?;
    let manifest = save_recordings(&recordings, spec.window_s, None::<Preprocess>, &dataset_dir)?;

    let ds = synth_dataset(&spec)?;
    let provenance_path = dataset_dir.join("provenance.json");
    let text = serde_json::to_string_pretty(&ds.provenance)
        .map_err(|e| Error::Config(format!("provenance serialization failed: {e}")))?;
    std::fs::write(&provenance_path, text).map_err(|source| Error::Io {
        path: provenance_path.clone(),
        source,
    })?;

    let mut report = RunReport::new("synth", cfg, threads_in_use(cfg));
    report.dataset = Some(dataset_summary(&ds));
    report.timings.total_seconds = t0.elapsed().as_secs_f64();
    let report_path = out_dir.join("synth_report.json");
    report.save(&report_path)?;
    Ok(CommandOutput {
        report,
        files: vec![manifest, provenance_path, report_path],
    })
}

/// Extract the feature matrix and write it with its provenance companion.
pub fn cmd_extract(cfg: &PipelineConfig, out_dir: &Path) -> Result<CommandOutput> {
    let t0 = Instant::now();
    ensure_dir(out_dir)?;
    let ds = load_or_generate(cfg)?;
    let t_extract = Instant::now();
    let (matrix, extraction) = extract(cfg, &ds)?;
    let extract_seconds = t_extract.elapsed().as_secs_f64();

    let matrix_path = out_dir.join("features.csv");
    save_matrix(&matrix, &matrix_path)?;
    let extraction_path = out_dir.join("extraction.json");
    let text = serde_json::to_string_pretty(&extraction)
        .map_err(|e| Error::Config(format!("extraction report serialization failed: {e}")))?;
    std::fs::write(&extraction_path, text).map_err(|source| Error::Io {
        path: extraction_path.clone(),
        source,
    })?;

    let mut report = RunReport::new("extract", cfg, threads_in_use(cfg));
    report.dataset = Some(dataset_summary(&ds));
    report.extraction = Some(extraction);
    report.timings.extract_seconds = Some(extract_seconds);
    report.timings.total_seconds = t0.elapsed().as_secs_f64();
    let report_path = out_dir.join("extract_report.json");
    report.save(&report_path)?;
    Ok(CommandOutput {
        report,
        files: vec![matrix_path, extraction_path, report_path],
    })
}

/// Fit the configured classifier on the full matrix and report timing and
/// top importances.
pub fn cmd_train(cfg: &PipelineConfig, out_dir: &Path) -> Result<CommandOutput> {
    let t0 = Instant::now();
    ensure_dir(out_dir)?;
    let ds = load_or_generate(cfg)?;
    let t_extract = Instant::now();
    let (matrix, extraction) = extract(cfg, &ds)?;
    let extract_seconds = t_extract.elapsed().as_secs_f64();

    let t_fit = Instant::now();
    let model = fit_classifier(&cfg.classifier, &matrix, seeding::derive(cfg.seed, &[0xF17]))?;
    let fit_seconds = t_fit.elapsed().as_secs_f64();

    let mut report = RunReport::new("train", cfg, threads_in_use(cfg));
    if let Some(importances) = model.importances() {
        let mut pairs: Vec<(String, f64)> = matrix
            .names()
            .iter()
            .cloned()
            .zip(importances.iter().copied())
            .collect();
        pairs.sort_by(|a, b| b.1.total_cmp(&a.1));
        pairs.truncate(20);
        report.importances_top = Some(pairs);
    }
    report.dataset = Some(dataset_summary(&ds));
    report.extraction = Some(extraction);
    report.timings.extract_seconds = Some(extract_seconds);
    report.timings.train_seconds = Some(fit_seconds);
    report.timings.total_seconds = t0.elapsed().as_secs_f64();
    let report_path = out_dir.join("train_report.json");
    report.save(&report_path)?;
    Ok(CommandOutput {
        report,
        files: vec![report_path],
    })
}

/// Leave-one-subject-out evaluation, optionally preceded by random
/// hyperparameter search.
pub fn cmd_evaluate(cfg: &PipelineConfig, out_dir: &Path) -> Result<CommandOutput> {
    let t0 = Instant::now();
    ensure_dir(out_dir)?;
    let ds = load_or_generate(cfg)?;
    let t_extract = Instant::now();
    let (matrix, extraction) = extract(cfg, &ds)?;
    let extract_seconds = t_extract.elapsed().as_secs_f64();

    let mut report = RunReport::new("evaluate", cfg, threads_in_use(cfg));
    let mut spec = cfg.classifier;
    if let Some(search_cfg) = &cfg.search {
        let outcome = random_search(
            &search_cfg.space,
            &matrix,
            search_cfg.n_candidates,
            search_cfg.n_folds,
            seeding::derive(cfg.seed, &[0x5EA]),
        )?;
        spec = ClassifierSpec::RandomForest(outcome.best);
        report.search = Some(SearchBlock {
            best: outcome.best,
            candidates: outcome.candidates,
        });
    }
    let eval = loso_cv(&matrix, &spec, cfg.seed)?;
    report.metrics = Some(MetricsBlock::from(&eval));
    report.eval = Some(eval);
    report.dataset = Some(dataset_summary(&ds));
    report.extraction = Some(extraction);
    report.timings.extract_seconds = Some(extract_seconds);
    report.timings.total_seconds = t0.elapsed().as_secs_f64();
    let report_path = out_dir.join("evaluate_report.json");
    report.save(&report_path)?;
    Ok(CommandOutput {
        report,
        files: vec![report_path],
    })
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    w.write_record(header).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    for row in rows {
        w.write_record(row).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Rank channels and evaluate the add-one-channel-at-a-time curve; emits
/// plot-ready delimited text.
pub fn cmd_select_channels(cfg: &PipelineConfig, out_dir: &Path) -> Result<CommandOutput> {
    let t0 = Instant::now();
    ensure_dir(out_dir)?;
    let ds = load_or_generate(cfg)?;
    let t_extract = Instant::now();
    let (matrix, extraction) = extract(cfg, &ds)?;
    let extract_seconds = t_extract.elapsed().as_secs_f64();

    let ranking = rank_channels(
        &matrix,
        cfg.selection.channel_method,
        &cfg.selection_forest(),
        seeding::derive(cfg.seed, &[0xC4A]),
    )?;
    let k_max = if cfg.selection.curve_k_max == 0 {
        ranking.entries.len()
    } else {
        cfg.selection.curve_k_max.min(ranking.entries.len())
    };
    let curve = channel_curve(&matrix, &ranking, k_max, &cfg.classifier, cfg.seed)?;
    let points: Vec<CurvePoint> = curve
        .iter()
        .map(|(k, eval)| CurvePoint {
            k: *k,
            channels: ranking.top(*k),
            weighted_f1: eval.weighted_f1,
            kappa: eval.kappa,
            auc: eval.auc,
            train_seconds_total: eval.total_train_seconds(),
        })
        .collect();

    let curve_path = out_dir.join("channel_curve.csv");
    write_csv(
        &curve_path,
        &["k", "channels", "weighted_f1", "kappa", "auc", "train_seconds_total"],
        &points
            .iter()
            .map(|p| {
                vec![
                    p.k.to_string(),
                    p.channels.join("|"),
                    format!("{:.6}", p.weighted_f1),
                    format!("{:.6}", p.kappa),
                    format!("{:.6}", p.auc),
                    format!("{:.3}", p.train_seconds_total),
                ]
            })
            .collect::<Vec<_>>(),
    )?;

    let mut report = RunReport::new("select-channels", cfg, threads_in_use(cfg));
    report.dataset = Some(dataset_summary(&ds));
    report.extraction = Some(extraction);
    report.channel_ranking = Some(ranking);
    report.channel_curve = Some(points);
    report.timings.extract_seconds = Some(extract_seconds);
    report.timings.total_seconds = t0.elapsed().as_secs_f64();
    let report_path = out_dir.join("select_channels_report.json");
    report.save(&report_path)?;
    Ok(CommandOutput {
        report,
        files: vec![curve_path, report_path],
    })
}

/// Compare the configured feature-selection methods at matched k: selection
/// wall time plus leave-one-subject-out metrics on the selected features.
pub fn cmd_select_features(cfg: &PipelineConfig, out_dir: &Path) -> Result<CommandOutput> {
    let t0 = Instant::now();
    ensure_dir(out_dir)?;
    let ds = load_or_generate(cfg)?;
    let t_extract = Instant::now();
    let (matrix, extraction) = extract(cfg, &ds)?;
    let extract_seconds = t_extract.elapsed().as_secs_f64();

    let forest = cfg.selection_forest();
    let k = cfg.selection.k;
    let sel_seed = seeding::derive(cfg.seed, &[0x5E1]);
    let mut comparisons = Vec::new();
    let mut clusters = None;
    for method in &cfg.selection.methods {
        let selection: FeatureSelection = match method {
            SelectionMethod::Ife => ife(&matrix, k, &forest, sel_seed)?,
            SelectionMethod::Rfe => rfe(&matrix, k, cfg.selection.rfe_step, &forest, sel_seed)?,
            SelectionMethod::Cife => {
                let (sel, map) = cife(&matrix, cfg.selection.rho_thres, k, &forest, sel_seed)?;
                clusters = Some(map);
                sel
            }
        };
        let reduced = matrix.select_columns(&selection.selected)?;
        let eval = loso_cv(&reduced, &cfg.classifier, seeding::derive(cfg.seed, &[0xE7A1]))?;
        comparisons.push(SelectionComparison {
            selection,
            eval: MetricsBlock::from(&eval),
            eval_train_seconds: eval.total_train_seconds(),
        });
    }

    let table_path = out_dir.join("feature_selection.csv");
    write_csv(
        &table_path,
        &["method", "k", "selection_seconds", "n_fits", "weighted_f1", "kappa", "auc"],
        &comparisons
            .iter()
            .map(|c| {
                vec![
                    format!("{:?}", c.selection.method),
                    c.selection.k.to_string(),
                    format!("{:.3}", c.selection.wall_seconds),
                    c.selection.n_fits.to_string(),
                    format!("{:.6}", c.eval.weighted_f1),
                    format!("{:.6}", c.eval.kappa),
                    format!("{:.6}", c.eval.auc),
                ]
            })
            .collect::<Vec<_>>(),
    )?;

    let mut report = RunReport::new("select-features", cfg, threads_in_use(cfg));
    report.dataset = Some(dataset_summary(&ds));
    report.extraction = Some(extraction);
    report.selections = Some(comparisons);
    report.clusters = clusters;
    report.timings.extract_seconds = Some(extract_seconds);
    report.timings.total_seconds = t0.elapsed().as_secs_f64();
    let report_path = out_dir.join("select_features_report.json");
    report.save(&report_path)?;
    Ok(CommandOutput {
        report,
        files: vec![table_path, report_path],
    })
}

/// Random-forest training-time scaling versus channel count and tree count.
pub fn cmd_bench(cfg: &PipelineConfig, out_dir: &Path) -> Result<CommandOutput> {
    let t0 = Instant::now();
    ensure_dir(out_dir)?;
    let base_trees = match cfg.classifier {
        ClassifierSpec::RandomForest(ForestParams { n_trees, .. }) => n_trees,
        _ => ForestParams::default().n_trees,
    };
    let bench = super::bench::run_bench(&cfg.bench, base_trees, cfg.seed)?;

    let table_path = out_dir.join("bench_scaling.csv");
    let mut rows: Vec<Vec<String>> = bench
        .channel_scaling
        .iter()
        .map(|c| {
            vec![
                "channels".to_string(),
                c.channels.to_string(),
                c.n_features.to_string(),
                format!("{:.4}", c.median_train_seconds),
            ]
        })
        .collect();
    rows.extend(bench.tree_scaling.iter().map(|t| {
        vec![
            "trees".to_string(),
            t.n_trees.to_string(),
            (bench.channel_scaling.first().map_or(0, |c| c.n_features)).to_string(),
            format!("{:.4}", t.median_train_seconds),
        ]
    }));
    write_csv(&table_path, &["axis", "value", "n_features", "median_train_seconds"], &rows)?;

    let mut report = RunReport::new("bench", cfg, threads_in_use(cfg));
    report.bench = Some(bench);
    report.timings.total_seconds = t0.elapsed().as_secs_f64();
    let report_path = out_dir.join("bench_report.json");
    report.save(&report_path)?;
    Ok(CommandOutput {
        report,
        files: vec![table_path, report_path],
    })
}
